//! Core types of the Dirac (AKNS / Zakharov–Shabat) system and propagation of
//! its two auxiliary linear systems: `u_x = G u` in space and `R_t = F R` in
//! time, with
//!
//! ```text
//! G = i (z j + j V),   F = -i (z² j + z j V - (i V_x - j V²) / 2),
//! j = diag(I_m1, -I_m2),   V = [[0, v], [v*, 0]].
//! ```

use crate::error::{Error, Result};
use crate::linalg::{identity, max_abs, op_norm, CMat, C64, I};
use crate::ode::{integrate_pair, Output};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Block sizes `(m1, m2)` of the signature matrix `j = diag(I_m1, -I_m2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    m1: usize,
    m2: usize,
}

impl Signature {
    pub fn new(m1: usize, m2: usize) -> Result<Self> {
        if m1 == 0 || m2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "block sizes must be positive, got ({m1}, {m2})"
            )));
        }
        Ok(Self { m1, m2 })
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    pub fn m(&self) -> usize {
        self.m1 + self.m2
    }

    pub fn j(&self) -> CMat {
        let m = self.m();
        CMat::from_fn(m, m, |r, c| {
            if r != c {
                C64::new(0.0, 0.0)
            } else if r < self.m1 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(-1.0, 0.0)
            }
        })
    }

    pub(crate) fn check_potential(&self, v: &CMat) -> Result<()> {
        if v.nrows() != self.m1 || v.ncols() != self.m2 {
            return Err(Error::Dimension {
                expected: format!("{}x{}", self.m1, self.m2),
                found: format!("{}x{}", v.nrows(), v.ncols()),
            });
        }
        Ok(())
    }

    pub(crate) fn check_square(&self, h: &CMat) -> Result<()> {
        let m = self.m();
        if h.nrows() != m || h.ncols() != m {
            return Err(Error::Dimension {
                expected: format!("{m}x{m}"),
                found: format!("{}x{}", h.nrows(), h.ncols()),
            });
        }
        Ok(())
    }

    /// Split an `m x m` matrix into its `(11, 12, 21, 22)` blocks.
    pub fn blocks(&self, h: &CMat) -> (CMat, CMat, CMat, CMat) {
        let (m1, m2) = (self.m1, self.m2);
        (
            h.view((0, 0), (m1, m1)).into_owned(),
            h.view((0, m1), (m1, m2)).into_owned(),
            h.view((m1, 0), (m2, m1)).into_owned(),
            h.view((m1, m1), (m2, m2)).into_owned(),
        )
    }
}

/// A spectral parameter `z`. Weyl-function operations need `Im z > 0`; real
/// values are accepted for j-unitarity diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParameter(C64);

impl SpectralParameter {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::InvalidArgument("spectral parameter must be finite".into()));
        }
        if im < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "spectral parameter must lie in the closed upper half-plane, got Im z = {im}"
            )));
        }
        Ok(Self(C64::new(re, im)))
    }

    /// A parameter strictly inside the upper half-plane.
    pub fn upper(re: f64, im: f64) -> Result<Self> {
        if !(im > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Weyl-function operations need Im z > 0, got {im}"
            )));
        }
        Self::new(re, im)
    }

    pub fn value(&self) -> C64 {
        self.0
    }

    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }

    pub(crate) fn require_upper(&self) -> Result<()> {
        if self.0.im > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "Weyl-function operations need Im z > 0, got {}",
                self.0.im
            )))
        }
    }
}

/// `V = [[0, v], [v*, 0]]`.
pub fn assemble_v(v: &CMat, sig: Signature) -> Result<CMat> {
    sig.check_potential(v)?;
    let (m1, m) = (sig.m1(), sig.m());
    let mut out = CMat::zeros(m, m);
    out.view_mut((0, m1), (m1, sig.m2())).copy_from(v);
    out.view_mut((m1, 0), (sig.m2(), m1)).copy_from(&v.adjoint());
    Ok(out)
}

/// `j V` without forming the product: row blocks of `V` with the lower one negated.
fn j_times(sig: Signature, big_v: &CMat) -> CMat {
    let mut out = big_v.clone();
    for r in sig.m1()..sig.m() {
        for c in 0..sig.m() {
            out[(r, c)] = -out[(r, c)];
        }
    }
    out
}

/// `G = i (z j + j V)`.
pub fn build_g(z: SpectralParameter, v: &CMat, sig: Signature) -> Result<CMat> {
    let big_v = assemble_v(v, sig)?;
    Ok(g_from_v(z.value(), &big_v, sig))
}

pub(crate) fn g_from_v(z: C64, big_v: &CMat, sig: Signature) -> CMat {
    (sig.j() * z + j_times(sig, big_v)) * I
}

/// `F = -i (z² j + z j V - (i V_x - j V²) / 2)`.
pub fn build_f(z: SpectralParameter, v: &CMat, v_x: &CMat, sig: Signature) -> Result<CMat> {
    sig.check_potential(v_x)?;
    let big_v = assemble_v(v, sig)?;
    let big_vx = assemble_v(v_x, sig)?;
    Ok(f_from_v(z.value(), &big_v, &big_vx, sig))
}

pub(crate) fn f_from_v(z: C64, big_v: &CMat, big_vx: &CMat, sig: Signature) -> CMat {
    let jv = j_times(sig, big_v);
    let jv2 = j_times(sig, &(big_v * big_v));
    let inner = sig.j() * (z * z) + &jv * z - (big_vx * I - jv2) * C64::new(0.5, 0.0);
    inner * (-I)
}

/// The Hermitian quadratic form `A* j A`.
pub fn h_form(sample: &CMat, sig: Signature) -> Result<CMat> {
    sig.check_square(sample)?;
    let h = sample.adjoint() * sig.j() * sample;
    Ok(crate::linalg::hermitian_part(&h))
}

/// Plane-wave potential `v(x, t) = q e^{i(kx - ωt)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWave {
    amplitude: CMat,
    wavenumber: f64,
    frequency: f64,
}

impl PlaneWave {
    /// Requires `q q* q = γ² q`, i.e. all nonzero singular values of `q` equal.
    pub fn new(amplitude: CMat, wavenumber: f64, frequency: f64) -> Result<Self> {
        if !wavenumber.is_finite() || !frequency.is_finite() {
            return Err(Error::InvalidArgument("plane-wave parameters must be finite".into()));
        }
        equal_singular_values(&amplitude)?;
        Ok(Self { amplitude, wavenumber, frequency })
    }

    pub fn amplitude(&self) -> &CMat {
        &self.amplitude
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    /// The common singular value `γ` of the amplitude.
    pub fn gamma(&self) -> f64 {
        op_norm(&self.amplitude)
    }

    pub fn value(&self, x: f64, t: f64) -> CMat {
        let phase = C64::new(0.0, self.wavenumber * x - self.frequency * t).exp();
        &self.amplitude * phase
    }

    pub fn dx(&self, x: f64, t: f64) -> CMat {
        self.value(x, t) * C64::new(0.0, self.wavenumber)
    }

    pub fn dt(&self, x: f64, t: f64) -> CMat {
        self.value(x, t) * C64::new(0.0, -self.frequency)
    }

    /// The same wave with its amplitude advanced to time `t`.
    pub fn at_time(&self, t: f64) -> PlaneWave {
        PlaneWave {
            amplitude: self.value(0.0, t),
            wavenumber: self.wavenumber,
            frequency: self.frequency,
        }
    }
}

/// Returns `γ` if `q q* q = γ² q` holds to relative `1e-10`.
pub(crate) fn equal_singular_values(q: &CMat) -> Result<f64> {
    let gamma = op_norm(q);
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let defect = max_abs(&(q * q.adjoint() * q - q * C64::new(gamma * gamma, 0.0)));
    if defect > 1e-10 * gamma.powi(3) {
        return Err(Error::InvalidArgument(format!(
            "plane-wave amplitude must have equal nonzero singular values (defect {defect:.3e})"
        )));
    }
    Ok(gamma)
}

/// Clamped cubic spline through complex samples.
#[derive(Debug, Clone, PartialEq)]
struct ComplexSpline {
    x: Vec<f64>,
    y: Vec<C64>,
    m: Vec<C64>,
}

impl ComplexSpline {
    fn new(x: &[f64], y: &[C64]) -> Self {
        let n = x.len();
        if n == 2 {
            return Self { x: x.to_vec(), y: y.to_vec(), m: vec![C64::new(0.0, 0.0); 2] };
        }
        // end slopes from second-order one-sided differences
        let slope = |i0: usize, i1: usize, i2: usize, at: usize| -> C64 {
            let (x0, x1, x2) = (x[i0], x[i1], x[i2]);
            let xa = x[at];
            let l0 = ((xa - x1) + (xa - x2)) / ((x0 - x1) * (x0 - x2));
            let l1 = ((xa - x0) + (xa - x2)) / ((x1 - x0) * (x1 - x2));
            let l2 = ((xa - x0) + (xa - x1)) / ((x2 - x0) * (x2 - x1));
            y[i0] * l0 + y[i1] * l1 + y[i2] * l2
        };
        let d0 = slope(0, 1, 2, 0);
        let dn = slope(n - 3, n - 2, n - 1, n - 1);

        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut lower = vec![0.0; n];
        let mut rhs = vec![C64::new(0.0, 0.0); n];
        diag[0] = 2.0 * h[0];
        upper[0] = h[0];
        rhs[0] = ((y[1] - y[0]) / h[0] - d0) * 6.0;
        for i in 1..n - 1 {
            lower[i] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            upper[i] = h[i];
            rhs[i] = ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]) * 6.0;
        }
        lower[n - 1] = h[n - 2];
        diag[n - 1] = 2.0 * h[n - 2];
        rhs[n - 1] = (dn - (y[n - 1] - y[n - 2]) / h[n - 2]) * 6.0;

        // Thomas algorithm
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![C64::new(0.0, 0.0); n];
        c_prime[0] = upper[0] / diag[0];
        d_prime[0] = rhs[0] / diag[0];
        for i in 1..n {
            let denom = diag[i] - lower[i] * c_prime[i - 1];
            c_prime[i] = if i < n - 1 { upper[i] / denom } else { 0.0 };
            d_prime[i] = (rhs[i] - d_prime[i - 1] * lower[i]) / denom;
        }
        let mut m = vec![C64::new(0.0, 0.0); n];
        m[n - 1] = d_prime[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = d_prime[i] - m[i + 1] * c_prime[i];
        }
        Self { x: x.to_vec(), y: y.to_vec(), m }
    }

    fn interval(&self, x: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    fn eval(&self, x: f64) -> (C64, C64) {
        let i = self.interval(x);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.m[i], self.m[i + 1]);
        let value = y0 * a + y1 * b + (m0 * (a * a * a - a) + m1 * (b * b * b - b)) * (h * h / 6.0);
        let deriv = (y1 - y0) / h + (m1 * (3.0 * b * b - 1.0) - m0 * (3.0 * a * a - 1.0)) * (h / 6.0);
        (value, deriv)
    }
}

/// A potential given by samples on a strictly increasing grid starting at a
/// nonnegative point, interpolated by clamped cubic splines entrywise.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPotential {
    grid: Vec<f64>,
    samples: Vec<CMat>,
    splines: Vec<ComplexSpline>,
    rows: usize,
    cols: usize,
}

impl SampledPotential {
    pub fn new(grid: Vec<f64>, samples: Vec<CMat>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != samples.len() {
            return Err(Error::InvalidArgument(
                "sampled potential needs at least two points and one sample per point".into(),
            ));
        }
        if grid[0] < 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidArgument(
                "sample grid must be nonnegative and strictly increasing".into(),
            ));
        }
        let (rows, cols) = samples[0].shape();
        if samples.iter().any(|s| s.shape() != (rows, cols)) {
            return Err(Error::InvalidArgument("samples must share one shape".into()));
        }
        if samples.iter().any(|s| s.iter().any(|z| !z.is_finite())) {
            return Err(Error::NonFiniteInput("potential sample".into()));
        }
        let splines = (0..rows * cols)
            .map(|idx| {
                let (r, c) = (idx / cols, idx % cols);
                let ys: Vec<C64> = samples.iter().map(|s| s[(r, c)]).collect();
                ComplexSpline::new(&grid, &ys)
            })
            .collect();
        Ok(Self { grid, samples, splines, rows, cols })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn samples(&self) -> &[CMat] {
        &self.samples
    }

    pub fn value(&self, x: f64) -> CMat {
        CMat::from_fn(self.rows, self.cols, |r, c| self.splines[r * self.cols + c].eval(x).0)
    }

    pub fn dx(&self, x: f64) -> CMat {
        CMat::from_fn(self.rows, self.cols, |r, c| self.splines[r * self.cols + c].eval(x).1)
    }
}

/// The potential `v(·)` at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialProfile {
    Zero(Signature),
    Constant(CMat),
    PlaneWave(PlaneWave),
    Sampled(SampledPotential),
}

impl PotentialProfile {
    pub fn signature(&self) -> Signature {
        let shape = |m: &CMat| Signature { m1: m.nrows(), m2: m.ncols() };
        match self {
            PotentialProfile::Zero(sig) => *sig,
            PotentialProfile::Constant(v) => shape(v),
            PotentialProfile::PlaneWave(p) => shape(&p.amplitude),
            PotentialProfile::Sampled(s) => Signature { m1: s.rows, m2: s.cols },
        }
    }

    pub fn value(&self, x: f64) -> CMat {
        match self {
            PotentialProfile::Zero(sig) => CMat::zeros(sig.m1(), sig.m2()),
            PotentialProfile::Constant(v) => v.clone(),
            PotentialProfile::PlaneWave(p) => p.value(x, 0.0),
            PotentialProfile::Sampled(s) => s.value(x),
        }
    }

    pub fn dx(&self, x: f64) -> CMat {
        match self {
            PotentialProfile::Zero(sig) => CMat::zeros(sig.m1(), sig.m2()),
            PotentialProfile::Constant(v) => CMat::zeros(v.nrows(), v.ncols()),
            PotentialProfile::PlaneWave(p) => p.dx(x, 0.0),
            PotentialProfile::Sampled(s) => s.dx(x),
        }
    }

    /// Largest `x` at which the profile is defined.
    pub fn x_limit(&self) -> f64 {
        match self {
            PotentialProfile::Sampled(s) => *s.grid.last().unwrap(),
            _ => f64::INFINITY,
        }
    }

    /// `sup ‖v(x)‖` over `[0, x_max]` (sampled profiles: over the samples and
    /// spline midpoints).
    pub fn sup_norm(&self, x_max: f64) -> f64 {
        match self {
            PotentialProfile::Zero(_) => 0.0,
            PotentialProfile::Constant(v) => op_norm(v),
            PotentialProfile::PlaneWave(p) => p.gamma(),
            PotentialProfile::Sampled(s) => {
                let mut best: f64 = 0.0;
                for w in s.grid.windows(2) {
                    if w[0] > x_max {
                        break;
                    }
                    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
                        let x = w[0] + frac * (w[1] - w[0]);
                        best = best.max(op_norm(&s.value(x)));
                    }
                }
                best
            }
        }
    }
}

/// Fundamental-solution samples `u(s_i, z)` together with the independently
/// propagated inverse. Stored matrices are scaled: the true values are
/// `values[i] · e^{scale_log[i]}` and `inverse_values[i] · e^{inverse_scale_log[i]}`.
#[derive(Debug, Clone)]
pub struct PropagatorSamples {
    pub grid: Vec<f64>,
    pub values: Vec<CMat>,
    pub inverse_values: Vec<CMat>,
    pub z: SpectralParameter,
    pub scale_log: Vec<f64>,
    pub inverse_scale_log: Vec<f64>,
}

impl PropagatorSamples {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// The unscaled propagator at sample `i`.
    pub fn value(&self, i: usize) -> CMat {
        &self.values[i] * C64::new(self.scale_log[i].exp(), 0.0)
    }

    pub fn inverse(&self, i: usize) -> CMat {
        &self.inverse_values[i] * C64::new(self.inverse_scale_log[i].exp(), 0.0)
    }

    /// `max |values[i] · inverse_values[i] - I|` after undoing the scales.
    pub fn inverse_defect(&self, i: usize) -> f64 {
        let s = (self.scale_log[i] + self.inverse_scale_log[i]).exp();
        let prod = &self.values[i] * &self.inverse_values[i] * C64::new(s, 0.0);
        max_abs(&(prod - identity(self.values[i].nrows())))
    }

    fn from_solution(sol: crate::ode::PairSolution, z: SpectralParameter) -> Self {
        Self {
            grid: sol.grid,
            values: sol.values,
            inverse_values: sol.inverse,
            z,
            scale_log: sol.scale_log,
            inverse_scale_log: sol.inverse_scale_log,
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

fn check_x_range(profile: &PotentialProfile, x_max: f64) -> Result<()> {
    if !(x_max > 0.0) || !x_max.is_finite() {
        return Err(Error::InvalidArgument(format!("x span must be [0, x_max] with x_max > 0, got {x_max}")));
    }
    if x_max > profile.x_limit() * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "x_max = {x_max} exceeds the sampled range {}",
            profile.x_limit()
        )));
    }
    Ok(())
}

/// Propagate `u_x = G u`, `u(0) = I` over `[0, x_max]`, recording every accepted step.
pub fn propagate_u(
    profile: &PotentialProfile,
    z: SpectralParameter,
    x_max: f64,
    tol: f64,
) -> Result<PropagatorSamples> {
    check_tol(tol)?;
    check_x_range(profile, x_max)?;
    propagate_u_segment(profile, z, Output::Steps { start: 0.0, end: x_max }, tol)
}

/// Propagate `u_x = G u` from `grid[0]` (where `u = I`) and record at each grid point.
/// With `grid[0] = 0` this is the normalised fundamental solution.
pub fn propagate_u_on_grid(
    profile: &PotentialProfile,
    z: SpectralParameter,
    grid: &[f64],
    tol: f64,
) -> Result<PropagatorSamples> {
    check_tol(tol)?;
    let last = *grid
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty grid".into()))?;
    if grid[0] < 0.0 {
        return Err(Error::InvalidArgument("x grid must be nonnegative".into()));
    }
    if grid.len() > 1 {
        check_x_range(profile, last)?;
    }
    propagate_u_segment(profile, z, Output::Grid(grid), tol)
}

pub(crate) fn propagate_u_segment(
    profile: &PotentialProfile,
    z: SpectralParameter,
    output: Output<'_>,
    tol: f64,
) -> Result<PropagatorSamples> {
    let sig = profile.signature();
    let zv = z.value();
    let coef = |x: f64| {
        let big_v = assemble_v(&profile.value(x), sig).expect("profile shape matches signature");
        g_from_v(zv, &big_v, sig)
    };
    let sol = integrate_pair(coef, sig.m(), output, tol, "x")?;
    Ok(PropagatorSamples::from_solution(sol, z))
}

/// Time-dependent coefficients `(v, v_x)` along a line `x = const`, e.g. the
/// boundary traces at `x = 0`.
pub trait BoundaryValues: Sync {
    fn signature(&self) -> Signature;
    fn values_at(&self, t: f64) -> (CMat, CMat);
    /// Largest `t` at which the data is defined.
    fn t_limit(&self) -> f64 {
        f64::INFINITY
    }
}

/// Propagate `R_t = F R`, `R(0) = I` over `[0, t_max]`, recording every accepted step.
pub fn propagate_r<B: BoundaryValues + ?Sized>(
    trace: &B,
    z: SpectralParameter,
    t_max: f64,
    tol: f64,
) -> Result<PropagatorSamples> {
    check_tol(tol)?;
    if !(t_max > 0.0) || t_max > trace.t_limit() * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "t span [0, {t_max}] is empty or exceeds the data range {}",
            trace.t_limit()
        )));
    }
    propagate_r_impl(trace, z, Output::Steps { start: 0.0, end: t_max }, tol)
}

/// Propagate `R_t = F R` from `grid[0] = 0` and record at each grid point.
pub fn propagate_r_on_grid<B: BoundaryValues + ?Sized>(
    trace: &B,
    z: SpectralParameter,
    grid: &[f64],
    tol: f64,
) -> Result<PropagatorSamples> {
    check_tol(tol)?;
    let last = *grid
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty grid".into()))?;
    if grid[0] != 0.0 || last > trace.t_limit() * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(
            "t grid must start at 0 and stay inside the data range".into(),
        ));
    }
    propagate_r_impl(trace, z, Output::Grid(grid), tol)
}

fn propagate_r_impl<B: BoundaryValues + ?Sized>(
    trace: &B,
    z: SpectralParameter,
    output: Output<'_>,
    tol: f64,
) -> Result<PropagatorSamples> {
    let sig = trace.signature();
    let zv = z.value();
    let coef = |t: f64| {
        let (v, vx) = trace.values_at(t);
        let big_v = assemble_v(&v, sig).expect("trace shape matches signature");
        let big_vx = assemble_v(&vx, sig).expect("trace shape matches signature");
        f_from_v(zv, &big_v, &big_vx, sig)
    };
    let sol = integrate_pair(coef, sig.m(), output, tol, "t")?;
    Ok(PropagatorSamples::from_solution(sol, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar(z: C64) -> CMat {
        CMat::from_element(1, 1, z)
    }

    fn sig11() -> Signature {
        Signature::new(1, 1).unwrap()
    }

    #[test]
    fn j_is_an_involution() {
        let sig = Signature::new(2, 3).unwrap();
        let j = sig.j();
        assert_eq!(&j * &j, identity(5));
        assert_eq!(j.adjoint(), j);
    }

    #[test]
    fn assemble_examples() {
        let sig = sig11();
        assert_eq!(assemble_v(&scalar(c(0.0, 0.0)), sig).unwrap(), CMat::zeros(2, 2));
        let v1 = assemble_v(&scalar(c(1.0, 0.0)), sig).unwrap();
        assert_eq!(v1, CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]));
        let vi = assemble_v(&scalar(c(0.0, 1.0)), sig).unwrap();
        assert_eq!(vi, CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]));
        assert_eq!(vi.adjoint(), vi);
        // anticommutes with j
        let j = sig.j();
        assert_eq!(&j * &vi + &vi * &j, CMat::zeros(2, 2));
    }

    #[test]
    fn assemble_rejects_bad_shape() {
        let sig = Signature::new(2, 1).unwrap();
        assert!(matches!(
            assemble_v(&CMat::zeros(1, 2), sig),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn g_examples() {
        let sig = sig11();
        let zi = SpectralParameter::new(0.0, 1.0).unwrap();
        let z0 = SpectralParameter::new(0.0, 0.0).unwrap();
        let g = build_g(zi, &scalar(c(0.0, 0.0)), sig).unwrap();
        assert_eq!(g, CMat::from_row_slice(2, 2, &[c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]));
        let g = build_g(z0, &scalar(c(1.0, 0.0)), sig).unwrap();
        assert_eq!(g, CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]));
        let g = build_g(zi, &scalar(c(1.0, 0.0)), sig).unwrap();
        assert_eq!(g, CMat::from_row_slice(2, 2, &[c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]));
    }

    #[test]
    fn f_examples() {
        let sig = sig11();
        let zi = SpectralParameter::new(0.0, 1.0).unwrap();
        let zero = scalar(c(0.0, 0.0));
        let f = build_f(zi, &zero, &zero, sig).unwrap();
        assert!(max_abs(&(f - CMat::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)]))) < 1e-15);
        let z0 = SpectralParameter::new(0.0, 0.0).unwrap();
        // z = 0 leaves F = -(i/2) j V²
        let f = build_f(z0, &scalar(c(1.0, 0.0)), &zero, sig).unwrap();
        assert!(max_abs(&(f - CMat::from_row_slice(2, 2, &[c(0.0, -0.5), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.5)]))) < 1e-15);
    }

    #[test]
    fn f_j_identity() {
        // F* j + j F = i(z̄ - z)((z + z̄) I + V)
        let sig = Signature::new(2, 1).unwrap();
        let v = CMat::from_row_slice(2, 1, &[c(0.3, -0.2), c(-0.1, 0.7)]);
        let vx = CMat::from_row_slice(2, 1, &[c(1.1, 0.4), c(0.2, -0.5)]);
        for (re, im) in [(1.0, 0.0), (0.4, 0.9), (-2.0, 0.3)] {
            let z = SpectralParameter::new(re, im).unwrap();
            let f = build_f(z, &v, &vx, sig).unwrap();
            let j = sig.j();
            let lhs = f.adjoint() * &j + &j * &f;
            let zv = z.value();
            let big_v = assemble_v(&v, sig).unwrap();
            let rhs = (identity(3) * (zv + zv.conj()) + big_v) * (I * (zv.conj() - zv));
            assert!(max_abs(&(lhs - rhs)) < 1e-14);
        }
    }

    #[test]
    fn h_form_examples() {
        let sig = sig11();
        assert_eq!(h_form(&identity(2), sig).unwrap(), sig.j());
        let e = std::f64::consts::E;
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0 / e, 0.0), c(e, 0.0)]));
        let h = h_form(&d, sig).unwrap();
        assert!((h[(0, 0)].re - (-2.0f64).exp()).abs() < 1e-15);
        assert!((h[(1, 1)].re + e * e).abs() < 1e-14);
    }

    #[test]
    fn zero_profile_propagation_is_diagonal_exponential() {
        let sig = sig11();
        let z = SpectralParameter::new(0.0, 1.0).unwrap();
        let s = propagate_u_on_grid(&PotentialProfile::Zero(sig), z, &[0.0, 1.0], 1e-12).unwrap();
        let u = s.value(1);
        assert!((u[(0, 0)] - c((-1.0f64).exp(), 0.0)).norm() < 1e-11);
        assert!((u[(1, 1)] - c(1.0f64.exp(), 0.0)).norm() < 1e-11);
        assert!(u[(0, 1)].norm() < 1e-15 && u[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn constant_profile_matches_closed_form_exponential() {
        // G² = κ² I with κ² = |v|² - z², hence exp(xG) = cosh(κx) I + sinh(κx)/κ G.
        let sig = sig11();
        let z = SpectralParameter::new(0.0, 0.75).unwrap();
        let v = scalar(c(1.0, 0.0));
        let g = build_g(z, &v, sig).unwrap();
        let kappa = (c(1.0, 0.0) - z.value() * z.value()).sqrt();
        let exact = identity(2) * kappa.cosh() + &g * (kappa.sinh() / kappa);
        let s = propagate_u_on_grid(&PotentialProfile::Constant(v), z, &[0.0, 1.0], 1e-12).unwrap();
        assert!(max_abs(&(s.value(1) - exact)) < 1e-10);
        assert!(s.inverse_defect(1) < 1e-10);
    }

    #[test]
    fn real_z_is_j_unitary() {
        let sig = sig11();
        let z = SpectralParameter::new(1.0, 0.0).unwrap();
        let s = propagate_u(&PotentialProfile::Zero(sig), z, 5.0, 1e-10).unwrap();
        for i in 0..s.len() {
            let h = h_form(&s.value(i), sig).unwrap();
            assert!(max_abs(&(h - sig.j())) < 1e-9);
        }
    }

    #[test]
    fn h_decreases_for_upper_half_plane() {
        let prof = PotentialProfile::Constant(CMat::from_row_slice(2, 1, &[c(0.4, 0.1), c(-0.3, 0.2)]));
        let sig = prof.signature();
        let z = SpectralParameter::new(0.2, 0.5).unwrap();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
        let s = propagate_u_on_grid(&prof, z, &grid, 1e-10).unwrap();
        for i in 1..s.len() {
            let d = h_form(&s.value(i - 1), sig).unwrap() - h_form(&s.value(i), sig).unwrap();
            let scale = max_abs(&d).max(1.0);
            assert!(hermitian_eigenvalues(&d)[0] >= -1e-8 * scale);
        }
    }

    #[test]
    fn zero_trace_r_is_diagonal() {
        struct ZeroTrace;
        impl BoundaryValues for ZeroTrace {
            fn signature(&self) -> Signature {
                Signature::new(1, 1).unwrap()
            }
            fn values_at(&self, _t: f64) -> (CMat, CMat) {
                (CMat::zeros(1, 1), CMat::zeros(1, 1))
            }
        }
        let z = SpectralParameter::new(0.0, 1.0).unwrap();
        let s = propagate_r_on_grid(&ZeroTrace, z, &[0.0, 1.0], 1e-12).unwrap();
        let r = s.value(1);
        assert!((r[(0, 0)] - c(0.0, 1.0).exp()).norm() < 1e-11);
        assert!((r[(1, 1)] - c(0.0, -1.0).exp()).norm() < 1e-11);
    }

    #[test]
    fn sampled_potential_reproduces_quadratic() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.3).collect();
        let f = |x: f64| c(x * x - x, 0.5 * x * x + 2.0);
        let samples = grid.iter().map(|&x| scalar(f(x))).collect();
        let sp = SampledPotential::new(grid, samples).unwrap();
        for x in [0.0, 0.1, 1.37, 2.9, 3.0] {
            assert!((sp.value(x)[(0, 0)] - f(x)).norm() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn plane_wave_requires_equal_singular_values() {
        let q = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(PlaneWave::new(q, 1.0, 0.0).is_err());
        let q = CMat::from_row_slice(2, 2, &[c(0.0, 0.3), c(0.0, 0.0), c(0.0, 0.0), c(-0.3, 0.0)]);
        assert!(PlaneWave::new(q, 1.0, 0.0).is_ok());
    }

    #[test]
    fn invalid_span_rejected() {
        let sig = sig11();
        let z = SpectralParameter::new(0.0, 1.0).unwrap();
        assert!(propagate_u(&PotentialProfile::Zero(sig), z, 0.0, 1e-8).is_err());
        assert!(propagate_u(&PotentialProfile::Zero(sig), z, 1.0, -1.0).is_err());
    }
}
