//! Möbius value sets, matrix-ball geometry and the Weyl function of the Dirac
//! system as the limit of nested balls.
//!
//! At depth `x` the candidate set is the ball
//! `{φ : [I φ*] H [I; φ] ≥ 0}` with `H = u(x,z)* j u(x,z)`. Writing
//! `L = -H₂₂`, `c = L⁻¹ H₂₁` and `S = H₁₁ - H₁₂ H₂₂⁻¹ H₂₁`, the form equals
//! `S - (φ - c)* L (φ - c)`, so the ball is `c + L^{-1/2} K S^{1/2}`, `‖K‖ ≤ 1`.

use crate::dirac::{propagate_u_on_grid, PotentialProfile, PropagatorSamples, Signature, SpectralParameter};
use crate::error::{Error, Result};
use crate::linalg::{
    self, dominant_column_basis, hermitian_eigenvalues, hermitian_part, hermitian_pow, max_abs,
    min_hermitian_eigenvalue, normalize_max, op_norm, solve_left, solve_right, CMat, C64,
};

/// Eigenvalues of the Schur complement above this are clipped to zero.
pub const SCHUR_CLIP: f64 = -1e-10;

/// Upper bound on `rate · Δx` for a single propagation segment.
pub const SEGMENT_EXPONENT: f64 = 20.0;

/// Tolerance on eigenvalues used by [`property_j_check`].
pub const PROPERTY_J_TOL: f64 = 1e-12;

/// A matrix together with the logarithm of a positive scalar it has been
/// divided by: the represented value is `mat · e^{log_scale}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMatrix {
    pub mat: CMat,
    pub log_scale: f64,
}

impl ScaledMatrix {
    pub fn new(mat: CMat) -> Self {
        let (mat, log_scale) = normalize_max(&mat);
        Self { mat, log_scale }
    }

    pub fn unscaled(&self) -> CMat {
        &self.mat * C64::new(self.log_scale.exp(), 0.0)
    }
}

/// Product `b · a` renormalised to unit max entry; log-scales add.
pub fn lft_compose(a: &ScaledMatrix, b: &ScaledMatrix) -> ScaledMatrix {
    let (mat, s) = normalize_max(&(&b.mat * &a.mat));
    ScaledMatrix { mat, log_scale: a.log_scale + b.log_scale + s }
}

/// `([0 I] C P) ([I 0] C P)⁻¹` for an `m x m` coefficient `C` and `m x m1` parameter `P`.
pub fn moebius_apply(coeff: &CMat, p: &CMat, sig: Signature) -> Result<CMat> {
    sig.check_square(coeff)?;
    if p.nrows() != sig.m() || p.ncols() != sig.m1() {
        return Err(Error::Dimension {
            expected: format!("{}x{}", sig.m(), sig.m1()),
            found: format!("{}x{}", p.nrows(), p.ncols()),
        });
    }
    let cp = coeff * p;
    let top = cp.rows(0, sig.m1()).into_owned();
    let bottom = cp.rows(sig.m1(), sig.m2()).into_owned();
    let smin = linalg::min_singular_value(&top) / max_abs(&cp).max(f64::MIN_POSITIVE);
    if !(smin > 1e-14) {
        return Err(Error::SingularDenominator { min_singular_value: smin });
    }
    solve_right(&bottom, &top).ok_or(Error::SingularDenominator { min_singular_value: 0.0 })
}

/// `P* P > 0` and `P* j P ≥ 0`, both to [`PROPERTY_J_TOL`] on eigenvalues.
pub fn property_j_check(p: &CMat, sig: Signature) -> bool {
    if p.nrows() != sig.m() || p.ncols() != sig.m1() {
        return false;
    }
    let gram = p.adjoint() * p;
    let form = p.adjoint() * sig.j() * p;
    min_hermitian_eigenvalue(&gram) > PROPERTY_J_TOL && min_hermitian_eigenvalue(&form) >= -PROPERTY_J_TOL
}

/// Matrix ball `{φ : (φ - c)* L (φ - c) ≤ S}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixBall {
    /// `m2 x m1` center `c`.
    pub center: CMat,
    /// `m2 x m2` positive-definite `L = -H₂₂`.
    pub left_weight: CMat,
    /// `m1 x m1` positive-semidefinite Schur complement `S`.
    pub right_schur: CMat,
}

impl MatrixBall {
    /// `‖L^{-1/2}‖`.
    pub fn left_radius_norm(&self) -> f64 {
        let lmin = hermitian_eigenvalues(&self.left_weight)[0];
        1.0 / lmin.sqrt()
    }

    /// `‖S^{1/2}‖`.
    pub fn right_radius_norm(&self) -> f64 {
        hermitian_eigenvalues(&self.right_schur)
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(0.0)
            .sqrt()
    }

    /// Product of the semi-radius norms: a bound on `‖φ - c‖` over the ball.
    pub fn radius_bound(&self) -> f64 {
        self.left_radius_norm() * self.right_radius_norm()
    }

    /// The ball point `c + L^{-1/2} K S^{1/2}`.
    pub fn point(&self, k: &CMat) -> Result<CMat> {
        let l = hermitian_pow(&self.left_weight, -0.5)?;
        let s = hermitian_pow(&self.right_schur, 0.5)?;
        Ok(&self.center + l * k * s)
    }

    /// Membership with eigenvalue tolerance relative to `‖S‖`.
    pub fn contains(&self, phi: &CMat, rel_tol: f64) -> bool {
        let d = phi - &self.center;
        let form = &self.right_schur - d.adjoint() * &self.left_weight * &d;
        let scale = op_norm(&self.right_schur).max(f64::MIN_POSITIVE);
        min_hermitian_eigenvalue(&form) >= -rel_tol * scale
    }

    /// Quadratic form `[I φ*] H [I; φ]` of this ball (with `H` recovered from the
    /// ball parameters).
    pub fn form(&self, phi: &CMat) -> CMat {
        let d = phi - &self.center;
        &self.right_schur - d.adjoint() * &self.left_weight * &d
    }
}

fn schur_from_parts(h11: &CMat, h12: &CMat, h21: &CMat, left: &CMat) -> Result<(CMat, CMat)> {
    let center = solve_left(left, h21).ok_or(Error::NotNegativeDefinite { max_eigenvalue: 0.0 })?;
    // S = H11 - H12 H22⁻¹ H21 = H11 + H12 L⁻¹ H21
    let schur = hermitian_part(&(h11 + h12 * &center));
    Ok((center, schur))
}

fn clip_schur(schur: CMat, scale: f64) -> Result<CMat> {
    let (vals, vecs) = linalg::hermitian_eig(&schur);
    let lo = vals.first().copied().unwrap_or(0.0);
    if lo >= 0.0 {
        return Ok(schur);
    }
    if lo < SCHUR_CLIP * scale.max(1.0) {
        return Err(Error::IndefiniteSchur { min_eigenvalue: lo });
    }
    let mut scaled = vecs.clone();
    for (c, &lam) in vals.iter().enumerate() {
        let f = lam.max(0.0);
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= f;
        }
    }
    Ok(&scaled * vecs.adjoint())
}

fn check_negative_definite(h22: &CMat) -> Result<CMat> {
    let left = -hermitian_part(h22);
    let vals = hermitian_eigenvalues(&left);
    if !(vals[0] > 0.0) {
        return Err(Error::NotNegativeDefinite { max_eigenvalue: -vals[0] });
    }
    Ok(left)
}

/// Ball parameters of the set `{φ : [I φ*] H [I; φ] ≥ 0}`. Requires `H₂₂ < 0`.
pub fn ball_from_h(h: &CMat, sig: Signature) -> Result<MatrixBall> {
    sig.check_square(h)?;
    let h = hermitian_part(h);
    let (h11, h12, h21, h22) = sig.blocks(&h);
    let left = check_negative_definite(&h22)?;
    let (center, schur) = schur_from_parts(&h11, &h12, &h21, &left)?;
    let right_schur = clip_schur(schur, 1.0)?;
    Ok(MatrixBall { center, left_weight: left, right_schur })
}

/// Ball of depth `x` computed from `u(x)` and the independently propagated
/// `u(x)⁻¹`. `L` and `c` come from `H = u* j u`; the Schur complement is taken
/// as `((u⁻¹ j u⁻*)₁₁)⁻¹`, which avoids the cancellation in
/// `H₁₁ - H₁₂ H₂₂⁻¹ H₂₁` once `u` is exponentially ill-conditioned.
///
/// `u_log`, `uinv_log` are the log-scales of the stored matrices.
pub fn ball_from_propagator(
    u: &CMat,
    u_log: f64,
    uinv: &CMat,
    uinv_log: f64,
    sig: Signature,
) -> Result<MatrixBall> {
    sig.check_square(u)?;
    sig.check_square(uinv)?;
    let j = sig.j();
    let h = hermitian_part(&(u.adjoint() * &j * u));
    let (_, _, h21, h22) = sig.blocks(&h);
    let left = check_negative_definite(&h22)?;
    let center = solve_left(&left, &h21).ok_or(Error::NotNegativeDefinite { max_eigenvalue: 0.0 })?;
    let hinv = hermitian_part(&(uinv * &j * uinv.adjoint()));
    let (hinv11, _, _, _) = sig.blocks(&hinv);
    let vals = hermitian_eigenvalues(&hinv11);
    if !(vals[0] > 0.0) {
        return Err(Error::IndefiniteSchur { min_eigenvalue: vals[0] });
    }
    let schur = hermitian_pow(&hinv11, -1.0)?;
    Ok(MatrixBall {
        center,
        left_weight: left * C64::new((2.0 * u_log).exp(), 0.0),
        right_schur: schur * C64::new((-2.0 * uinv_log).exp(), 0.0),
    })
}

/// Balls along a propagator trajectory (the `x = 0` sample gives the unit ball).
pub fn balls_along(samples: &PropagatorSamples, sig: Signature) -> Result<Vec<MatrixBall>> {
    (0..samples.len())
        .map(|i| {
            ball_from_propagator(
                &samples.values[i],
                samples.scale_log[i],
                &samples.inverse_values[i],
                samples.inverse_scale_log[i],
                sig,
            )
        })
        .collect()
}

/// Smallest eigenvalue of `[I φ*] H [I; φ]` is at least `-tol`.
pub fn ball_membership(phi: &CMat, h: &CMat, sig: Signature, tol: f64) -> Result<bool> {
    sig.check_square(h)?;
    if phi.nrows() != sig.m2() || phi.ncols() != sig.m1() {
        return Err(Error::Dimension {
            expected: format!("{}x{}", sig.m2(), sig.m1()),
            found: format!("{}x{}", phi.nrows(), phi.ncols()),
        });
    }
    let mut col = CMat::zeros(sig.m(), sig.m1());
    col.view_mut((0, 0), (sig.m1(), sig.m1())).fill_with_identity();
    col.view_mut((sig.m1(), 0), (sig.m2(), sig.m1())).copy_from(phi);
    let form = col.adjoint() * h * &col;
    Ok(min_hermitian_eigenvalue(&form) >= -tol)
}

/// Weyl function estimate at depth `x_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylEstimate {
    pub phi: CMat,
    pub z: SpectralParameter,
    pub x_max: f64,
    /// `‖L^{-1/2}‖ · ‖S^{1/2}‖` of the final ball.
    pub uncertainty: f64,
}

/// Segment boundaries on `[0, x_max]` such that `(Im z + sup‖v‖) · Δx ≤ 20`.
pub fn segment_points(profile: &PotentialProfile, z: SpectralParameter, x_max: f64) -> Vec<f64> {
    let rate = z.im() + profile.sup_norm(x_max);
    let n = ((rate * x_max / SEGMENT_EXPONENT).ceil() as usize).max(1);
    (0..=n).map(|i| x_max * i as f64 / n as f64).collect()
}

/// Composite propagator over `[0, x_max]` from segment-wise propagations, each
/// started from the identity. Returns `(u, u⁻¹)` as scaled matrices.
pub fn composite_propagator(
    profile: &PotentialProfile,
    z: SpectralParameter,
    points: &[f64],
    tol: f64,
) -> Result<(ScaledMatrix, ScaledMatrix)> {
    let m = profile.signature().m();
    let mut u = ScaledMatrix::new(linalg::identity(m));
    let mut uinv = ScaledMatrix::new(linalg::identity(m));
    for w in points.windows(2) {
        let seg = propagate_u_on_grid(profile, z, &[w[0], w[1]], tol)?;
        let fwd = ScaledMatrix { mat: seg.values[1].clone(), log_scale: seg.scale_log[1] };
        let bwd = ScaledMatrix { mat: seg.inverse_values[1].clone(), log_scale: seg.inverse_scale_log[1] };
        u = lft_compose(&u, &fwd);
        uinv = lft_compose(&bwd, &uinv);
    }
    Ok((u, uinv))
}

/// Weyl function estimate: center of the depth-`x_max` ball, with the ball's
/// radius bound as uncertainty.
pub fn weyl_estimate(
    profile: &PotentialProfile,
    z: SpectralParameter,
    x_max: f64,
    tol: f64,
) -> Result<WeylEstimate> {
    z.require_upper()?;
    if !(x_max > 0.0) {
        return Err(Error::InvalidArgument(format!("x_max must be positive, got {x_max}")));
    }
    let sig = profile.signature();
    let points = segment_points(profile, z, x_max);
    let (u, uinv) = composite_propagator(profile, z, &points, tol)?;
    let ball = ball_from_propagator(&u.mat, u.log_scale, &uinv.mat, uinv.log_scale, sig)?;
    let uncertainty = ball_uncertainty(&u, &uinv, sig)?;
    Ok(WeylEstimate { phi: ball.center, z, x_max, uncertainty })
}

/// Radius bound computed in log space so that it survives extreme scales.
fn ball_uncertainty(u: &ScaledMatrix, uinv: &ScaledMatrix, sig: Signature) -> Result<f64> {
    let j = sig.j();
    let h = hermitian_part(&(u.mat.adjoint() * &j * &u.mat));
    let (_, _, _, h22) = sig.blocks(&h);
    let lmin = hermitian_eigenvalues(&(-h22))[0];
    let hinv = hermitian_part(&(&uinv.mat * &j * uinv.mat.adjoint()));
    let (hinv11, _, _, _) = sig.blocks(&hinv);
    let smax_inv = hermitian_eigenvalues(&hinv11)[0];
    if !(lmin > 0.0) {
        return Err(Error::NotNegativeDefinite { max_eigenvalue: -lmin });
    }
    if !(smax_inv > 0.0) {
        return Err(Error::IndefiniteSchur { min_eigenvalue: smax_inv });
    }
    let log_unc = -0.5 * (lmin.ln() + 2.0 * u.log_scale) - 0.5 * (smax_inv.ln() + 2.0 * uinv.log_scale);
    Ok(log_unc.exp())
}

/// As [`weyl_estimate`], failing with [`Error::NonConvergence`] when the
/// uncertainty exceeds `cap`.
pub fn weyl_estimate_capped(
    profile: &PotentialProfile,
    z: SpectralParameter,
    x_max: f64,
    tol: f64,
    cap: f64,
) -> Result<WeylEstimate> {
    let est = weyl_estimate(profile, z, x_max, tol)?;
    if est.uncertainty > cap {
        return Err(Error::NonConvergence { uncertainty: est.uncertainty, cap });
    }
    Ok(est)
}

/// Depth at which the uncertainty of a constant-rate decay `e^{-2·Im z·x}`
/// would fall to `target`; a lower bound on what any bounded potential needs.
pub fn depth_for_uncertainty(z: SpectralParameter, target: f64) -> f64 {
    (-target.ln()) / (2.0 * z.im())
}

/// Weyl function of an `x`-independent potential: `φ = Y₂ Y₁⁻¹`, where the
/// columns of `[Y₁; Y₂]` span the invariant subspace of the constant `G`
/// belonging to eigenvalues with negative real part.
pub fn weyl_constant_potential(v0: &CMat, z: SpectralParameter) -> Result<CMat> {
    z.require_upper()?;
    let sig = Signature::new(v0.nrows(), v0.ncols())?;
    let g = crate::dirac::build_g(z, v0, sig)?;
    let sign = linalg::sign_function(&g)?;
    let m = sig.m();
    // projector onto the stable subspace
    let proj = (linalg::identity(m) - sign) * C64::new(0.5, 0.0);
    let trace: f64 = (0..m).map(|i| proj[(i, i)].re).sum();
    if (trace - sig.m1() as f64).abs() > 1e-6 {
        return Err(Error::Eigenstructure(format!(
            "stable subspace has dimension {trace:.3}, expected {}",
            sig.m1()
        )));
    }
    let basis = dominant_column_basis(&proj, sig.m1());
    let y1 = basis.rows(0, sig.m1()).into_owned();
    let y2 = basis.rows(sig.m1(), sig.m2()).into_owned();
    if linalg::min_singular_value(&y1) < 1e-12 {
        return Err(Error::Eigenstructure("upper block of the stable basis is singular".into()));
    }
    solve_right(&y2, &y1).ok_or_else(|| Error::Eigenstructure("upper block of the stable basis is singular".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::{propagate_u, PlaneWave};
    use crate::linalg::identity;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar(z: C64) -> CMat {
        CMat::from_element(1, 1, z)
    }

    fn sig11() -> Signature {
        Signature::new(1, 1).unwrap()
    }

    fn stacked(top: CMat, bottom: CMat) -> CMat {
        let mut p = CMat::zeros(top.nrows() + bottom.nrows(), top.ncols());
        p.view_mut((0, 0), top.shape()).copy_from(&top);
        p.view_mut((top.nrows(), 0), bottom.shape()).copy_from(&bottom);
        p
    }

    #[test]
    fn moebius_examples() {
        let sig = sig11();
        let p0 = stacked(identity(1), scalar(c(0.0, 0.0)));
        assert_eq!(moebius_apply(&identity(2), &p0, sig).unwrap(), scalar(c(0.0, 0.0)));
        let p = stacked(identity(1), scalar(c(0.3, -0.4)));
        assert!((moebius_apply(&identity(2), &p, sig).unwrap()[(0, 0)] - c(0.3, -0.4)).norm() < 1e-15);
        let coeff = CMat::from_row_slice(2, 2, &[c(2.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 3.0)]);
        let got = moebius_apply(&coeff, &p, sig).unwrap()[(0, 0)];
        let want = c(-1.0, 3.0) * c(0.3, -0.4) / c(2.0, 1.0);
        assert!((got - want).norm() < 1e-15);
    }

    #[test]
    fn moebius_singular_denominator() {
        let sig = sig11();
        let p = stacked(scalar(c(0.0, 0.0)), identity(1));
        assert!(matches!(moebius_apply(&identity(2), &p, sig), Err(Error::SingularDenominator { .. })));
    }

    #[test]
    fn property_j_examples() {
        let sig = Signature::new(2, 1).unwrap();
        assert!(property_j_check(&stacked(identity(2), CMat::zeros(1, 2)), sig));
        let sig11 = sig11();
        assert!(!property_j_check(&stacked(scalar(c(0.0, 0.0)), identity(1)), sig11));
        let k = CMat::from_row_slice(1, 2, &[c(0.6, 0.0), c(0.0, 0.8)]);
        assert!(property_j_check(&stacked(identity(2), k), sig));
        let k = CMat::from_row_slice(1, 2, &[c(0.9, 0.0), c(0.0, 0.8)]);
        assert!(!property_j_check(&stacked(identity(2), k), sig));
    }

    #[test]
    fn ball_of_j_is_unit_ball() {
        let sig = Signature::new(2, 1).unwrap();
        let ball = ball_from_h(&sig.j(), sig).unwrap();
        assert_eq!(ball.center, CMat::zeros(1, 2));
        assert_eq!(ball.left_weight, identity(1));
        assert_eq!(ball.right_schur, identity(2));
    }

    #[test]
    fn ball_of_zero_potential_at_depth_one() {
        let e2 = (2.0f64).exp();
        let h = CMat::from_row_slice(2, 2, &[c(1.0 / e2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-e2, 0.0)]);
        let ball = ball_from_h(&h, sig11()).unwrap();
        assert_eq!(ball.center[(0, 0)], c(0.0, 0.0));
        assert!((ball.left_weight[(0, 0)].re - e2).abs() < 1e-14);
        assert!((ball.right_schur[(0, 0)].re - 1.0 / e2).abs() < 1e-16);
        assert!((ball.radius_bound() - 1.0 / e2).abs() < 1e-15);
    }

    #[test]
    fn ball_requires_negative_lower_block() {
        let h = identity(2);
        assert!(matches!(ball_from_h(&h, sig11()), Err(Error::NotNegativeDefinite { .. })));
    }

    #[test]
    fn membership_examples() {
        let sig = sig11();
        assert!(ball_membership(&scalar(c(0.0, 0.0)), &sig.j(), sig, 0.0).unwrap());
        assert!(!ball_membership(&scalar(c(2.0, 0.0)), &sig.j(), sig, 1e-12).unwrap());
    }

    #[test]
    fn zero_potential_weyl_estimate() {
        let sig = sig11();
        for (re, im, x) in [(0.0, 1.0, 3.0), (-0.7, 0.4, 10.0), (2.0, 1.5, 40.0)] {
            let z = SpectralParameter::upper(re, im).unwrap();
            let est = weyl_estimate(&PotentialProfile::Zero(sig), z, x, 1e-10).unwrap();
            assert!(op_norm(&est.phi) < 1e-12);
            let want = (-2.0 * im * x).exp();
            assert!((est.uncertainty - want).abs() <= 1e-8 * want, "{} vs {}", est.uncertainty, want);
        }
    }

    #[test]
    fn constant_potential_oracle() {
        let v = scalar(c(1.0, 0.0));
        let z = SpectralParameter::upper(0.0, 0.75).unwrap();
        let phi = weyl_constant_potential(&v, z).unwrap();
        assert!((phi[(0, 0)] - c(0.0, 0.5)).norm() < 1e-13);
        let est = weyl_estimate(&PotentialProfile::Constant(v.clone()), z, 20.0, 1e-10).unwrap();
        assert!((est.phi[(0, 0)] - c(0.0, 0.5)).norm() < 1e-6);
        let zi = SpectralParameter::upper(0.0, 1.0).unwrap();
        let est = weyl_estimate(&PotentialProfile::Constant(v), zi, 10.0, 1e-10).unwrap();
        assert!(est.phi[(0, 0)].norm() <= 1.0);
    }

    #[test]
    fn constant_zero_potential_is_zero() {
        let z = SpectralParameter::upper(0.3, 0.2).unwrap();
        let phi = weyl_constant_potential(&CMat::zeros(2, 1), z).unwrap();
        assert!(op_norm(&phi) < 1e-14);
    }

    #[test]
    fn compose_identity_and_additivity() {
        let c0 = ScaledMatrix::new(CMat::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.5, 0.0), c(-3.0, 0.1), c(2.0, 2.0)]));
        let out = lft_compose(&ScaledMatrix::new(identity(2)), &c0);
        assert!(max_abs(&(out.unscaled() - c0.unscaled())) < 1e-14);

        let sig = sig11();
        let z = SpectralParameter::upper(0.0, 1.0).unwrap();
        let prof = PotentialProfile::Zero(sig);
        let whole = propagate_u_on_grid(&prof, z, &[0.0, 2.0], 1e-12).unwrap();
        let a = propagate_u_on_grid(&prof, z, &[0.0, 1.0], 1e-12).unwrap();
        let b = propagate_u_on_grid(&prof, z, &[1.0, 2.0], 1e-12).unwrap();
        let prod = lft_compose(&ScaledMatrix::new(a.value(1)), &ScaledMatrix::new(b.value(1)));
        let diff = max_abs(&(prod.unscaled() - whole.value(1)));
        assert!(diff < 1e-10 * max_abs(&whole.value(1)));
    }

    #[test]
    fn split_points_do_not_change_phi() {
        let q = CMat::from_element(1, 1, c(0.3, 0.0));
        let prof = PotentialProfile::PlaneWave(PlaneWave::new(q, 1.0, 0.59).unwrap());
        let z = SpectralParameter::upper(0.2, 0.8).unwrap();
        let sig = prof.signature();
        let single = composite_propagator(&prof, z, &[0.0, 6.0], 1e-13).unwrap();
        let split = composite_propagator(&prof, z, &[0.0, 0.7, 2.3, 4.1, 6.0], 1e-13).unwrap();
        let b1 = ball_from_propagator(&single.0.mat, single.0.log_scale, &single.1.mat, single.1.log_scale, sig).unwrap();
        let b2 = ball_from_propagator(&split.0.mat, split.0.log_scale, &split.1.mat, split.1.log_scale, sig).unwrap();
        assert!(op_norm(&(b1.center - b2.center)) < 1e-10);
    }

    #[test]
    fn membership_boundary_sampling_oracle() {
        // brute force: points c + L^{-1/2} K S^{1/2} with unitary K sit on the boundary
        let sig = Signature::new(2, 1).unwrap();
        let prof = PotentialProfile::Constant(CMat::from_row_slice(2, 1, &[c(0.5, 0.2), c(-0.1, 0.3)]));
        let z = SpectralParameter::upper(0.1, 0.6).unwrap();
        let s = propagate_u(&prof, z, 1.5, 1e-11).unwrap();
        let last = s.len() - 1;
        let h = crate::dirac::h_form(&s.value(last), sig).unwrap();
        let ball = ball_from_h(&h, sig).unwrap();
        for k in 0..16 {
            let theta = k as f64 * 0.4;
            let kmat = CMat::from_row_slice(1, 2, &[c(theta.cos(), 0.0), C64::from_polar(theta.sin(), 0.3 * theta)]);
            let phi = ball.point(&kmat).unwrap();
            assert!(ball_membership(&phi, &h, sig, 1e-10).unwrap());
        }
        assert!(ball_membership(&ball.center, &h, sig, 0.0).unwrap());
    }
}
