//! Recovery of the corner jet `w_k(t) = ∂ₓᵏ v(0, t)` from the boundary traces
//! `v(0, t)`, `v_x(0, t)`.
//!
//! Differentiating the dNLS equation `k` times in `x` and solving for the
//! highest derivative gives
//!
//! ```text
//! w_{k+2} = 2 ∂ₓᵏ(v v* v)|ₓ₌₀ - 2i d/dt w_k,
//! ∂ₓᵏ(v v* v) = Σ_{a+b+c=k} k!/(a! b! c!) w_a w_b* w_c,
//! ```
//!
//! so every `w_k` is determined by `w_0`, `w_1`. Boundary data is held as
//! Chebyshev series so that `d/dt` is exact.

use std::io::{Read, Write};

use crate::chebyshev::{chebyshev_points, ChebSeries, MatrixSeries, CHOP_REL};
use crate::dirac::{BoundaryValues, Signature};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, CMat, C64, I};

pub const MIN_DEGREE: usize = 4;
/// Extra Chebyshev degree required beyond the jet order.
pub const DEGREE_MARGIN: usize = 4;
pub const BLOW_UP: f64 = 1e150;
/// Largest derivative order for which multinomial weights are formed.
pub const MAX_LEIBNIZ_ORDER: usize = 60;

/// Where boundary values come from.
pub enum TraceSource<'a> {
    Function(&'a dyn Fn(f64) -> CMat),
    Samples { t: &'a [f64], values: &'a [CMat] },
}

/// `v(0, t)` and `v_x(0, t)` as Chebyshev series on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    sig: Signature,
    v0: MatrixSeries,
    v1: MatrixSeries,
    t_end: f64,
    degree: usize,
    fit_residual: f64,
}

impl BoundaryTrace {
    pub fn v0_series(&self) -> &MatrixSeries {
        &self.v0
    }

    pub fn v1_series(&self) -> &MatrixSeries {
        &self.v1
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Max deviation of the fit from the input at off-grid check points
    /// (closed-form input) or at the samples (sampled input).
    pub fn fit_residual(&self) -> f64 {
        self.fit_residual
    }

    /// `sup_t ‖v(0, t)‖` over a dense check grid.
    pub fn sup_v0(&self) -> f64 {
        self.v0.sup_norm(sup_points(self.degree))
    }

    /// `sup_t ‖v_x(0, t)‖` over a dense check grid.
    pub fn sup_v1(&self) -> f64 {
        self.v1.sup_norm(sup_points(self.degree))
    }

    /// `max_{r ≤ t} ‖v(0, r)‖`.
    pub fn max_v0_until(&self, t: f64) -> f64 {
        let n = sup_points(self.degree);
        let t = t.clamp(0.0, self.t_end);
        (0..=n)
            .map(|i| t * i as f64 / n as f64)
            .map(|s| crate::linalg::op_norm(&self.v0.eval(s)))
            .fold(0.0, f64::max)
    }
}

fn sup_points(degree: usize) -> usize {
    (8 * degree).max(200)
}

impl BoundaryValues for BoundaryTrace {
    fn signature(&self) -> Signature {
        self.sig
    }

    fn values_at(&self, t: f64) -> (CMat, CMat) {
        (self.v0.eval(t), self.v1.eval(t))
    }

    fn t_limit(&self) -> f64 {
        self.t_end
    }
}

fn fit_source(src: &TraceSource<'_>, sig: Signature, t_end: f64, degree: usize) -> Result<(MatrixSeries, f64)> {
    let (m1, m2) = (sig.m1(), sig.m2());
    let check_shape = |m: &CMat| -> Result<()> {
        if m.shape() != (m1, m2) {
            return Err(Error::Dimension { expected: format!("{m1}x{m2}"), found: format!("{}x{}", m.nrows(), m.ncols()) });
        }
        if m.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFiniteInput("boundary value".into()));
        }
        Ok(())
    };
    match src {
        TraceSource::Function(f) => {
            let pts = chebyshev_points(degree + 1, 0.0, t_end);
            let samples: Vec<CMat> = pts.iter().map(|&t| f(t)).collect();
            for s in &samples {
                check_shape(s)?;
            }
            let mut series = MatrixSeries::from_point_values(&samples, m1, m2, 0.0, t_end);
            series.chop(CHOP_REL);
            let checks = 2 * degree + 3;
            let mut resid: f64 = 0.0;
            for i in 0..checks {
                let t = t_end * (i as f64 + 0.5) / checks as f64;
                let want = f(t);
                check_shape(&want)?;
                resid = resid.max(max_abs(&(series.eval(t) - want)));
            }
            Ok((series, resid))
        }
        TraceSource::Samples { t, values } => {
            if t.len() != values.len() {
                return Err(Error::InvalidArgument("sample times and values differ in length".into()));
            }
            if t.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteInput("sample time".into()));
            }
            for v in values.iter() {
                check_shape(v)?;
            }
            if t.iter().any(|&x| x < -1e-12 || x > t_end * (1.0 + 1e-12)) {
                return Err(Error::InvalidArgument(format!("sample times must lie in [0, {t_end}]")));
            }
            let mut entries = Vec::with_capacity(m1 * m2);
            for r in 0..m1 {
                for c in 0..m2 {
                    let y: Vec<C64> = values.iter().map(|v| v[(r, c)]).collect();
                    entries.push(ChebSeries::fit_least_squares(t, &y, degree, 0.0, t_end)?);
                }
            }
            let mut series = MatrixSeries::from_entries(m1, m2, entries);
            series.chop(CHOP_REL);
            let resid = t
                .iter()
                .zip(values.iter())
                .map(|(&tt, v)| max_abs(&(series.eval(tt) - v)))
                .fold(0.0, f64::max);
            Ok((series, resid))
        }
    }
}

/// Fit both boundary traces on `[0, t_end]` with Chebyshev series of the given degree.
pub fn ingest_boundary(
    v0: TraceSource<'_>,
    v1: TraceSource<'_>,
    sig: Signature,
    t_end: f64,
    degree: usize,
) -> Result<BoundaryTrace> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("trace interval must be [0, T] with T > 0, got {t_end}")));
    }
    if degree < MIN_DEGREE {
        return Err(Error::InvalidArgument(format!("degree must be at least {MIN_DEGREE}, got {degree}")));
    }
    let (s0, r0) = fit_source(&v0, sig, t_end, degree)?;
    let (s1, r1) = fit_source(&v1, sig, t_end, degree)?;
    Ok(BoundaryTrace { sig, v0: s0, v1: s1, t_end, degree, fit_residual: r0.max(r1) })
}

/// Boundary samples as read from / written to the CSV exchange format:
/// header row, then `t`, followed by `re, im` pairs of `v(0,t)` entries in
/// row-major order, then the same for `v_x(0,t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySamples {
    pub t: Vec<f64>,
    pub v0: Vec<CMat>,
    pub v1: Vec<CMat>,
}

impl BoundarySamples {
    pub fn header(sig: Signature) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        for name in ["v", "vx"] {
            for r in 0..sig.m1() {
                for c in 0..sig.m2() {
                    h.push(format!("{name}_{r}_{c}_re"));
                    h.push(format!("{name}_{r}_{c}_im"));
                }
            }
        }
        h
    }

    pub fn read_csv<R: Read>(reader: R, sig: Signature) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let expected = 1 + 4 * sig.m1() * sig.m2();
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        if headers.len() != expected {
            return Err(Error::Parse(format!(
                "boundary CSV needs {expected} columns for a {}x{} potential, header has {}",
                sig.m1(),
                sig.m2(),
                headers.len()
            )));
        }
        let entries = sig.m1() * sig.m2();
        let mut out = BoundarySamples { t: Vec::new(), v0: Vec::new(), v1: Vec::new() };
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != expected {
                return Err(Error::Parse(format!("row {} has {} columns, expected {expected}", line + 2, rec.len())));
            }
            let nums: Vec<f64> = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {e}", line + 2))))
                .collect::<Result<_>>()?;
            if nums.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteInput(format!("row {}", line + 2)));
            }
            let mat = |off: usize| {
                CMat::from_fn(sig.m1(), sig.m2(), |r, c| {
                    let k = off + 2 * (r * sig.m2() + c);
                    C64::new(nums[k], nums[k + 1])
                })
            };
            out.t.push(nums[0]);
            out.v0.push(mat(1));
            out.v1.push(mat(1 + 2 * entries));
        }
        Ok(out)
    }

    pub fn write_csv<W: Write>(&self, writer: W, sig: Signature) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(Self::header(sig)).map_err(|e| Error::Parse(e.to_string()))?;
        for i in 0..self.t.len() {
            let mut row = vec![format!("{:.17e}", self.t[i])];
            for m in [&self.v0[i], &self.v1[i]] {
                for r in 0..sig.m1() {
                    for c in 0..sig.m2() {
                        row.push(format!("{:.17e}", m[(r, c)].re));
                        row.push(format!("{:.17e}", m[(r, c)].im));
                    }
                }
            }
            wtr.write_record(&row).map_err(|e| Error::Parse(e.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `ln(k!/(a! b! c!))`.
fn ln_multinomial(k: usize, a: usize, b: usize, c: usize) -> f64 {
    let lf = |n: usize| (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
    lf(k) - lf(a) - lf(b) - lf(c)
}

fn multinomial(k: usize, a: usize, b: usize) -> f64 {
    ln_multinomial(k, a, b, k - a - b).exp().round()
}

/// Pointwise `Σ_{a+b+c=k} k!/(a!b!c!) w_a w_b* w_c` from values of the `w`s on
/// a common grid.
fn leibniz_cube_values(values: &[Vec<CMat>], k: usize) -> Vec<CMat> {
    let npts = values[0].len();
    (0..npts)
        .map(|p| {
            let mut acc = CMat::zeros(values[0][p].nrows(), values[0][p].ncols());
            for a in 0..=k {
                for b in 0..=(k - a) {
                    let c = k - a - b;
                    let w = multinomial(k, a, b);
                    acc += (&values[a][p] * values[b][p].adjoint() * &values[c][p]) * C64::new(w, 0.0);
                }
            }
            acc
        })
        .collect()
}

/// `∂ₓᵏ(v v* v)` at `x = 0` as a series, from the jet functions `w[0..=k]`,
/// evaluated on the collocation grid of degree `degree` and re-fitted.
pub fn leibniz_cube(w: &[MatrixSeries], k: usize, degree: usize) -> Result<MatrixSeries> {
    if k > MAX_LEIBNIZ_ORDER {
        return Err(Error::InvalidArgument(format!(
            "derivative order {k} exceeds the multinomial cap {MAX_LEIBNIZ_ORDER}"
        )));
    }
    if w.len() <= k {
        return Err(Error::InvalidArgument(format!("need w_0..w_{k}, have {} functions", w.len())));
    }
    let (a, b) = w[0].interval();
    let (rows, cols) = w[0].shape();
    let pts = chebyshev_points(degree + 1, a, b);
    let values: Vec<Vec<CMat>> = w[..=k].iter().map(|s| pts.iter().map(|&t| s.eval(t)).collect()).collect();
    let cube = leibniz_cube_values(&values, k);
    let mut series = MatrixSeries::from_point_values(&cube, rows, cols, a, b);
    series.chop(CHOP_REL);
    Ok(series)
}

/// Recovered `x`-derivatives `w_k(t) = ∂ₓᵏ v(0, t)` for `k = 0..=order`.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerJet {
    pub w: Vec<MatrixSeries>,
    pub order: usize,
    /// `w_k(0)`.
    pub jet0: Vec<CMat>,
    /// Largest re-substitution residual of the recursion on the collocation grid.
    pub recursion_residual: f64,
}

pub fn corner_jet(trace: &BoundaryTrace, order: usize) -> Result<CornerJet> {
    if order < 2 {
        return Err(Error::InvalidArgument(format!("jet order must be at least 2, got {order}")));
    }
    if trace.degree < order + DEGREE_MARGIN {
        return Err(Error::InvalidArgument(format!(
            "trace degree {} too small for jet order {order}; need at least {}",
            trace.degree,
            order + DEGREE_MARGIN
        )));
    }
    if order > MAX_LEIBNIZ_ORDER + 2 {
        return Err(Error::InvalidArgument(format!("jet order {order} exceeds the cap {}", MAX_LEIBNIZ_ORDER + 2)));
    }
    let degree = trace.degree;
    let (a, b) = (0.0, trace.t_end);
    let pts = chebyshev_points(degree + 1, a, b);
    let mut w = vec![trace.v0.clone(), trace.v1.clone()];
    let mut values: Vec<Vec<CMat>> = w.iter().map(|s| pts.iter().map(|&t| s.eval(t)).collect()).collect();
    let mut residual: f64 = 0.0;
    let (rows, cols) = w[0].shape();

    for k in 0..=order - 2 {
        let cube_vals = leibniz_cube_values(&values, k);
        let mut cube = MatrixSeries::from_point_values(&cube_vals, rows, cols, a, b);
        cube.chop(CHOP_REL);
        let dk = w[k].derivative();
        let mut next = cube.scaled(C64::new(2.0, 0.0)).add(&dk.scaled(-I * 2.0));
        next.chop(CHOP_REL);
        let magnitude = next.max_coeff();
        if !(magnitude <= BLOW_UP) {
            return Err(Error::SeriesBlowUp { order: k + 2, magnitude });
        }
        let next_vals: Vec<CMat> = pts.iter().map(|&t| next.eval(t)).collect();
        let scale = magnitude.max(1.0);
        for (p, &t) in pts.iter().enumerate() {
            let r = &next_vals[p] - &cube_vals[p] * C64::new(2.0, 0.0) + dk.eval(t) * (I * 2.0);
            residual = residual.max(max_abs(&r) / scale);
        }
        w.push(next);
        values.push(next_vals);
    }
    let jet0 = w.iter().map(|s| s.eval(0.0)).collect();
    Ok(CornerJet { w, order, jet0, recursion_residual: residual })
}

/// Truncated Taylor synthesis of `v(x, 0)` from the corner jet.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorSynthesis {
    pub x: Vec<f64>,
    pub values: Vec<CMat>,
    /// `‖jet0_K‖ x^K / K!` for the last retained term.
    pub last_term: Vec<f64>,
}

pub fn taylor_reconstruct(jet: &CornerJet, x_grid: &[f64], k_use: usize) -> Result<TaylorSynthesis> {
    if k_use > jet.order {
        return Err(Error::InvalidArgument(format!("K_use = {k_use} exceeds jet order {}", jet.order)));
    }
    let (rows, cols) = jet.jet0[0].shape();
    let mut values = Vec::with_capacity(x_grid.len());
    let mut last_term = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let mut acc = CMat::zeros(rows, cols);
        let mut factor = 1.0;
        let mut last = 0.0;
        for k in 0..=k_use {
            if k > 0 {
                factor *= x / k as f64;
            }
            let term = &jet.jet0[k] * C64::new(factor, 0.0);
            last = crate::linalg::op_norm(&term);
            acc += term;
        }
        values.push(acc);
        last_term.push(last);
    }
    Ok(TaylorSynthesis { x: x_grid.to_vec(), values, last_term })
}

/// Constants `M̃_k` (stored as logarithms) of a class `C({M̃_k})`, and the scale `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiAnalyticBounds {
    log_mk: Vec<f64>,
    pub a: f64,
}

impl QuasiAnalyticBounds {
    pub fn from_values(mk: &[f64], a: f64) -> Result<Self> {
        if mk.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::InvalidArgument("all M_k must be positive and finite".into()));
        }
        Self::from_logs(mk.iter().map(|m| m.ln()).collect(), a)
    }

    /// From `ln M̃_k`, for sequences such as `(k!)²` that overflow `f64`.
    pub fn from_logs(log_mk: Vec<f64>, a: f64) -> Result<Self> {
        if log_mk.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidArgument("log M_k must be finite".into()));
        }
        if !(a >= 0.0) {
            return Err(Error::InvalidArgument("scale a must be nonnegative".into()));
        }
        Ok(Self { log_mk, a })
    }

    pub fn len(&self) -> usize {
        self.log_mk.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_mk.is_empty()
    }

    pub fn log_mk(&self) -> &[f64] {
        &self.log_mk
    }
}

/// Tail exponent below which partial sums are flagged as growing without bound.
pub const DIVERGENCE_EXPONENT: f64 = 1.05;

#[derive(Debug, Clone, PartialEq)]
pub struct DenjoyCarleman {
    /// `S_n = Σ_{i=1}^n 1/L_i` for `n = 1..=N`.
    pub partial_sums: Vec<f64>,
    /// `L_n = inf_{n ≤ k ≤ N} M̃_k^{1/k}` for `n = 1..=N`.
    pub l_values: Vec<f64>,
    /// The infimum only runs up to this index.
    pub window_end: usize,
    /// `p` in `1/L_n ~ n^{-p}`, from the last halving of the range.
    pub tail_exponent: f64,
    /// `p ≤ DIVERGENCE_EXPONENT`: the partial sums look divergent (evidence of
    /// quasi-analyticity).
    pub divergent_trend: bool,
}

pub fn denjoy_carleman_diagnostic(bounds: &QuasiAnalyticBounds, n_max: usize) -> Result<DenjoyCarleman> {
    if n_max < 2 {
        return Err(Error::InvalidArgument("N must be at least 2".into()));
    }
    if bounds.len() <= n_max {
        return Err(Error::InvalidArgument(format!(
            "need M_0..M_{n_max}, have {} constants",
            bounds.len()
        )));
    }
    // suffix minima of ln M_k / k over k in [n, N]
    let mut log_l = vec![f64::INFINITY; n_max + 2];
    for k in (1..=n_max).rev() {
        log_l[k] = log_l[k + 1].min(bounds.log_mk[k] / k as f64);
    }
    let l_values: Vec<f64> = (1..=n_max).map(|n| log_l[n].exp()).collect();
    let mut partial_sums = Vec::with_capacity(n_max);
    let mut acc = 0.0;
    for &l in &l_values {
        acc += 1.0 / l;
        partial_sums.push(acc);
    }
    let half = n_max / 2;
    let tail_exponent = (log_l[n_max] - log_l[half]) / ((n_max as f64).ln() - (half as f64).ln());
    Ok(DenjoyCarleman {
        partial_sums,
        l_values,
        window_end: n_max,
        tail_exponent,
        divergent_trend: tail_exponent <= DIVERGENCE_EXPONENT,
    })
}
