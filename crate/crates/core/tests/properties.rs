use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use weylstrip_core::chebyshev::{ChebSeries, MatrixSeries};
use weylstrip_core::dirac::propagate_r_on_grid;
use weylstrip_core::evolution::evolve_weyl;
use weylstrip_core::linalg::{hermitian_part, identity, max_abs, min_hermitian_eigenvalue, op_norm};
use weylstrip_core::recovery::{denjoy_carleman_diagnostic, BoundarySamples, QuasiAnalyticBounds};
use weylstrip_core::verify::plane_wave;
use weylstrip_core::weyl::{ball_from_h, ball_membership, moebius_apply, property_j_check, weyl_estimate};
use weylstrip_core::{Signature, SpectralParameter};

type C64 = Complex64;
type CMat = DMatrix<C64>;

fn cmat(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols)
        .prop_map(move |v| CMat::from_iterator(rows, cols, v.into_iter().map(|(a, b)| C64::new(a, b))))
}

fn contraction(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
    (cmat(rows, cols), 0.0f64..0.999).prop_map(|(k, r)| {
        let n = op_norm(&k);
        if n == 0.0 {
            k
        } else {
            k * C64::new(r / n, 0.0)
        }
    })
}

fn stack(phi: &CMat) -> CMat {
    let (m2, m1) = phi.shape();
    let mut p = CMat::zeros(m1 + m2, m1);
    p.view_mut((0, 0), (m1, m1)).fill_with_identity();
    p.view_mut((m1, 0), (m2, m1)).copy_from(phi);
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_ignores_scalar_factor(r in cmat(3, 3), phi0 in contraction(1, 2), s in 0.1f64..1e6, arg in 0.0f64..6.28) {
        let sig = Signature::new(2, 1).unwrap();
        let r = r + identity(3) * C64::new(3.0, 0.0);
        let a = evolve_weyl(&phi0, &r, sig).unwrap().phi_t;
        let b = evolve_weyl(&phi0, &(&r * C64::from_polar(s, arg)), sig).unwrap().phi_t;
        prop_assert!(max_abs(&(&a - &b)) <= 1e-12 * max_abs(&a).max(1.0));
    }

    #[test]
    fn evolution_composes(r1 in cmat(2, 2), r2 in cmat(2, 2), phi0 in contraction(1, 1)) {
        let sig = Signature::new(1, 1).unwrap();
        let r1 = r1 + identity(2) * C64::new(2.5, 0.0);
        let r2 = r2 + identity(2) * C64::new(2.5, 0.0);
        let step = evolve_weyl(&phi0, &r1, sig).unwrap().phi_t;
        let two = evolve_weyl(&step, &r2, sig).unwrap().phi_t;
        let once = evolve_weyl(&phi0, &(&r2 * &r1), sig).unwrap().phi_t;
        prop_assert!(max_abs(&(two - once)) <= 1e-11);
    }

    #[test]
    fn identity_moebius_returns_parameter(p in contraction(2, 1)) {
        let sig = Signature::new(1, 2).unwrap();
        let out = moebius_apply(&identity(3), &stack(&p), sig).unwrap();
        prop_assert!(max_abs(&(out - &p)) <= 1e-15);
        prop_assert!(property_j_check(&stack(&p), sig));
    }

    #[test]
    fn ball_boundary_satisfies_form(a in cmat(3, 3), k in contraction(1, 2)) {
        // H = A* j A - t·I with t chosen so that H22 < 0
        let sig = Signature::new(2, 1).unwrap();
        let a = a + identity(3) * C64::new(2.0, 0.0);
        let h = hermitian_part(&(a.adjoint() * sig.j() * &a));
        let (_, _, _, h22) = sig.blocks(&h);
        prop_assume!(min_hermitian_eigenvalue(&(-h22)) > 1e-3);
        let ball = ball_from_h(&h, sig).unwrap();
        // scale K onto the unit sphere: boundary point
        let n = op_norm(&k);
        prop_assume!(n > 1e-6);
        let k = k * C64::new(1.0 / n, 0.0);
        let phi = ball.point(&k).unwrap();
        let form = stack(&phi).adjoint() * &h * stack(&phi);
        let scale = op_norm(&h).max(1.0);
        prop_assert!(min_hermitian_eigenvalue(&hermitian_part(&form)) >= -1e-10 * scale);
        prop_assert!(ball_membership(&ball.center, &h, sig, 1e-10).unwrap());
    }

    #[test]
    fn chebyshev_derivative_of_polynomial(c in prop::collection::vec(-1.0f64..1.0, 6), t in 0.0f64..2.0) {
        // p(t) = Σ c_k t^k on [0, 2]
        let p = |t: f64| c.iter().rev().fold(0.0, |acc, ck| acc * t + ck);
        let dp = |t: f64| c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, ck)| acc * t + k as f64 * ck);
        let s = ChebSeries::interpolate(|t| C64::new(p(t), 0.0), 5, 0.0, 2.0);
        prop_assert!((s.eval(t).re - p(t)).abs() < 1e-13);
        prop_assert!((s.derivative().eval(t).re - dp(t)).abs() < 1e-12);
    }

    #[test]
    fn boundary_csv_round_trips(rows in prop::collection::vec(cmat(2, 2), 1..5)) {
        let sig = Signature::new(1, 1).unwrap();
        let samples = BoundarySamples {
            t: (0..rows.len()).map(|i| i as f64 * 0.1).collect(),
            v0: rows.iter().map(|m| m.view((0, 0), (1, 1)).into_owned()).collect(),
            v1: rows.iter().map(|m| m.view((1, 1), (1, 1)).into_owned()).collect(),
        };
        let mut buf = Vec::new();
        samples.write_csv(&mut buf, sig).unwrap();
        prop_assert_eq!(BoundarySamples::read_csv(buf.as_slice(), sig).unwrap(), samples);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn evolved_weyl_matches_direct(re in -1.0f64..1.0, im in 0.6f64..2.0, t in 0.05f64..0.8) {
        let field = plane_wave(&CMat::from_element(1, 1, C64::new(0.3, 0.0)), 1.0).unwrap();
        let sig = Signature::new(1, 1).unwrap();
        let z = SpectralParameter::upper(re, im).unwrap();
        let x_max = 25.0 / im;
        let phi0 = weyl_estimate(&field.profile_at(0.0), z, x_max, 1e-11).unwrap().phi;
        let r = propagate_r_on_grid(&field.line(0.0), z, &[0.0, t], 1e-11).unwrap();
        let evolved = evolve_weyl(&phi0, &r.value(1), sig).unwrap().phi_t;
        let direct = weyl_estimate(&field.profile_at(t), z, x_max, 1e-11).unwrap().phi;
        prop_assert!(op_norm(&(evolved - direct)) < 1e-6);
    }
}

#[test]
fn unit_bounds_sum_to_count() {
    let b = QuasiAnalyticBounds::from_values(&[1.0; 51], 2.0).unwrap();
    let d = denjoy_carleman_diagnostic(&b, 50).unwrap();
    for (n, s) in d.partial_sums.iter().enumerate() {
        assert_eq!(*s, (n + 1) as f64);
    }
    assert_eq!(d.window_end, 50);
}

#[test]
fn matrix_series_chop_keeps_constants_exact() {
    let c = CMat::from_row_slice(2, 1, &[C64::new(0.5, -0.25), C64::new(0.0, 1.0)]);
    let mut s = MatrixSeries::interpolate(|_| c.clone(), 2, 1, 20, 0.0, 3.0);
    s.chop(1e-15);
    assert_eq!(s.degree(), 0);
    assert!(max_abs(&(s.eval(1.7) - &c)) < 1e-15);
}
