//! Time evolution of the Weyl function by the linear-fractional action of the
//! time propagator `R(t, z)`, the spectral domains where `R` is j-monotone,
//! and the quarter-plane limit `φ(0, z) = -lim R₂₂⁻¹ R₂₁`.

use crate::dirac::{
    assemble_v, f_from_v, propagate_r_on_grid, BoundaryValues, PropagatorSamples, Signature, SpectralParameter,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermitian_part, min_singular_value, normalize_max, op_norm, solve_left, solve_right, CMat, C64};
use crate::recovery::BoundaryTrace;

/// Denominator conditions below this mark an exceptional spectral point.
pub const EXCEPTIONAL_THRESHOLD: f64 = 1e-10;

/// Default lower bound on `Im z` in the quarter-plane domain `Ω`.
pub const DEFAULT_MIN_IM: f64 = 0.5;

/// Grid points per persistence window in the quarter-plane iteration.
pub const POINTS_PER_WINDOW: usize = 8;

/// `φ_t = (R₂₁ + R₂₂φ₀)(R₁₁ + R₁₂φ₀)⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolved {
    pub phi_t: CMat,
    /// `σ_min(R₁₁ + R₁₂φ₀)` with `R` scaled to unit max entry.
    pub denominator_condition: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub phi_t: CMat,
    pub t: f64,
    pub z: SpectralParameter,
    pub denominator_condition: f64,
}

pub fn evolve_weyl(phi0: &CMat, r: &CMat, sig: Signature) -> Result<Evolved> {
    sig.check_square(r)?;
    if phi0.shape() != (sig.m2(), sig.m1()) {
        return Err(Error::Dimension {
            expected: format!("{}x{}", sig.m2(), sig.m1()),
            found: format!("{}x{}", phi0.nrows(), phi0.ncols()),
        });
    }
    let (rn, _) = normalize_max(r);
    let (r11, r12, r21, r22) = sig.blocks(&rn);
    let den = r11 + r12 * phi0;
    let num = r21 + r22 * phi0;
    let cond = min_singular_value(&den);
    if !(cond >= EXCEPTIONAL_THRESHOLD) {
        return Err(Error::SingularDenominator { min_singular_value: cond });
    }
    let phi_t = solve_right(&num, &den).ok_or(Error::SingularDenominator { min_singular_value: cond })?;
    Ok(Evolved { phi_t, denominator_condition: cond })
}

/// Evolve `φ₀` by every sample of a time propagator.
pub fn evolve_along(phi0: &CMat, samples: &PropagatorSamples, sig: Signature) -> Result<Vec<EvolutionResult>> {
    (0..samples.len())
        .map(|i| {
            let e = evolve_weyl(phi0, &samples.values[i], sig)?;
            Ok(EvolutionResult { phi_t: e.phi_t, t: samples.grid[i], z: samples.z, denominator_condition: e.denominator_condition })
        })
        .collect()
}

/// Bounds on the solution and its boundary traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBounds {
    /// `sup ‖v(x, r)‖` over `x ≥ 0`, `r ≤ t`.
    pub m: f64,
    /// `sup ‖v(0, r)‖` over `r ≤ t`.
    pub m0: f64,
    /// `sup ‖v(0, t)‖` over all `t ≥ 0`.
    pub m_hat: f64,
    /// `sup ‖v_x(0, t)‖` over all `t ≥ 0`. Recorded only.
    pub m_breve: f64,
}

impl DomainBounds {
    pub fn new(m: f64, m0: f64, m_hat: f64, m_breve: f64) -> Result<Self> {
        for (name, v) in [("M", m), ("M0", m0), ("Mhat", m_hat), ("Mbreve", m_breve)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("bound {name} must be finite and nonnegative, got {v}")));
            }
        }
        Ok(Self { m, m0, m_hat, m_breve })
    }

    /// Trace-derived bounds; `M` and `M0` default to the trace sup.
    pub fn from_trace(trace: &BoundaryTrace) -> Self {
        let m_hat = trace.sup_v0();
        Self { m: m_hat, m0: m_hat, m_hat, m_breve: trace.sup_v1() }
    }
}

/// `{z : Im z ⋄ im_bound, Re z ⋄ re_bound}` with the comparison sides and
/// strictness recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub re_bound: f64,
    /// `true`: `Re z` below the bound, `false`: above.
    pub re_below: bool,
    pub re_strict: bool,
    pub im_bound: f64,
    pub im_strict: bool,
}

impl Domain {
    pub fn contains(&self, z: C64) -> bool {
        let im_ok = if self.im_strict { z.im > self.im_bound } else { z.im >= self.im_bound };
        let re_ok = match (self.re_below, self.re_strict) {
            (true, true) => z.re < self.re_bound,
            (true, false) => z.re <= self.re_bound,
            (false, true) => z.re > self.re_bound,
            (false, false) => z.re >= self.re_bound,
        };
        im_ok && re_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleDomains {
    pub t: f64,
    /// `Im z > 0, Re z < -M/2`: `R*jR ≤ j`.
    pub omega_t: Domain,
    /// `Im z > 0, Re z > M0/2`: `R*jR ≥ j`.
    pub omega_hat_t: Domain,
    /// `Im z ≥ min_im, Re z ≤ -Mhat`: the quarter-plane limit applies.
    pub omega: Domain,
}

pub fn admissible_domains(bounds: DomainBounds, t: f64) -> AdmissibleDomains {
    admissible_domains_with(bounds, t, DEFAULT_MIN_IM)
}

pub fn admissible_domains_with(bounds: DomainBounds, t: f64, min_im: f64) -> AdmissibleDomains {
    AdmissibleDomains {
        t,
        omega_t: Domain { re_bound: -bounds.m / 2.0, re_below: true, re_strict: true, im_bound: 0.0, im_strict: true },
        omega_hat_t: Domain { re_bound: bounds.m0 / 2.0, re_below: false, re_strict: true, im_bound: 0.0, im_strict: true },
        omega: Domain { re_bound: -bounds.m_hat, re_below: true, re_strict: false, im_bound: min_im, im_strict: false },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonotoneSide {
    /// `j - R*jR ≥ 0`.
    BelowJ,
    /// `R*jR - j ≥ 0`.
    AboveJ,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityReport {
    pub holds: bool,
    /// First sample violating the inequality.
    pub offending: Option<usize>,
    /// Smallest relative eigenvalue seen.
    pub worst: f64,
}

/// Check `R*jR ≤ j` or `≥ j` at every sample, eigenvalues to
/// `-tol · max(1, ‖R*jR‖)`.
pub fn r_monotonicity_check(samples: &PropagatorSamples, sig: Signature, side: MonotoneSide, tol: f64) -> MonotonicityReport {
    let j = sig.j();
    let mut worst = f64::INFINITY;
    let mut offending = None;
    for i in 0..samples.len() {
        // work with the scaled matrix: e^{2s}(e^{-2s} j - Rs* j Rs)
        let rs = &samples.values[i];
        let w = (-2.0 * samples.scale_log[i]).exp();
        let form = hermitian_part(&(rs.adjoint() * &j * rs));
        let diff = match side {
            MonotoneSide::BelowJ => &j * C64::new(w, 0.0) - &form,
            MonotoneSide::AboveJ => &form - &j * C64::new(w, 0.0),
        };
        let scale = w.max(op_norm(&form));
        let rel = hermitian_eigenvalues(&diff)[0] / scale;
        worst = worst.min(rel);
        if rel < -tol && offending.is_none() {
            offending = Some(i);
        }
    }
    MonotonicityReport { holds: offending.is_none(), offending, worst }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuarterPlaneEstimate {
    pub phi0: CMat,
    pub t_used: f64,
    /// `‖R(t_used)[I; φ₀]‖`.
    pub residual: f64,
    /// `min σ_min(R₂₂(t))` over the computed grid up to `t_used`.
    pub r22_min_sv: f64,
    pub converged: bool,
    /// Persistence window length.
    pub window: f64,
}

/// Quarter-plane limit from a fitted boundary trace, with `Mhat` read off the
/// trace and the default `Im z` floor.
pub fn quarterplane_weyl(trace: &BoundaryTrace, z: SpectralParameter, t_max: f64, tol: f64) -> Result<QuarterPlaneEstimate> {
    quarterplane_weyl_with(trace, trace.sup_v0(), z, t_max, tol, DEFAULT_MIN_IM)
}

/// Quarter-plane limit for any boundary data with known `Mhat`.
pub fn quarterplane_weyl_with<B: BoundaryValues + ?Sized>(
    trace: &B,
    m_hat: f64,
    z: SpectralParameter,
    t_max: f64,
    tol: f64,
    min_im: f64,
) -> Result<QuarterPlaneEstimate> {
    let bounds = DomainBounds::new(m_hat, m_hat, m_hat, 0.0)?;
    let domains = admissible_domains_with(bounds, 0.0, min_im);
    if !domains.omega.contains(z.value()) {
        return Err(Error::OutsideDomain {
            re: z.re(),
            im: z.im(),
            reason: format!("quarter-plane limit needs Im z >= {min_im} and Re z <= {}", -m_hat),
        });
    }
    let t_max = t_max.min(trace.t_limit());
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidArgument(format!("t_max must be positive and finite, got {t_max}")));
    }
    let sig = trace.signature();
    let window = persistence_window(trace, z, t_max);
    let n = ((t_max * POINTS_PER_WINDOW as f64 / window).ceil() as usize).max(2);
    let grid: Vec<f64> = (0..=n).map(|i| t_max * i as f64 / n as f64).collect();
    let samples = propagate_r_on_grid(trace, z, &grid, tol)?;

    let (m1, m2) = (sig.m1(), sig.m2());
    let mut r22_min = f64::INFINITY;
    let mut prev: Option<CMat> = None;
    let mut plateau_start = 0.0;
    let mut result = None;
    for i in 0..samples.len() {
        let t = samples.grid[i];
        let (_, _, r21, r22) = sig.blocks(&samples.values[i]);
        r22_min = r22_min.min(min_singular_value(&r22) * samples.scale_log[i].exp());
        let est = -solve_left(&r22, &r21).ok_or(Error::SingularDenominator { min_singular_value: 0.0 })?;
        match &prev {
            Some(p) if op_norm(&(&est - p)) < tol => {
                if t - plateau_start >= window * (1.0 - 1e-12) {
                    result = Some((i, est.clone(), true));
                }
            }
            _ => plateau_start = t,
        }
        if result.is_some() {
            break;
        }
        if i + 1 == samples.len() {
            result = Some((i, est.clone(), false));
        }
        prev = Some(est);
    }
    let (i, phi0, converged) = result.expect("grid is nonempty");
    let mut col = CMat::zeros(m1 + m2, m1);
    col.view_mut((0, 0), (m1, m1)).fill_with_identity();
    col.view_mut((m1, 0), (m2, m1)).copy_from(&phi0);
    let residual = op_norm(&(&samples.values[i] * &col)) * samples.scale_log[i].exp();
    Ok(QuarterPlaneEstimate { phi0, t_used: samples.grid[i], residual, r22_min_sv: r22_min, converged, window })
}

/// `ln(1.5) / sup‖F(0, t, z)‖` with the sup over a uniform sampling of `[0, t_max]`.
pub fn persistence_window<B: BoundaryValues + ?Sized>(trace: &B, z: SpectralParameter, t_max: f64) -> f64 {
    let sig = trace.signature();
    let n = 400;
    let c1 = (0..=n)
        .map(|i| {
            let (v, vx) = trace.values_at(t_max * i as f64 / n as f64);
            let big_v = assemble_v(&v, sig).expect("trace shape matches signature");
            let big_vx = assemble_v(&vx, sig).expect("trace shape matches signature");
            op_norm(&f_from_v(z.value(), &big_v, &big_vx, sig))
        })
        .fold(0.0, f64::max);
    1.5f64.ln() / c1.max(f64::MIN_POSITIVE)
}
