//! Exact dNLS solutions and residual checks: the PDE itself, the zero-curvature
//! form of the Lax pair, and the factorization `u(x,t) R(t) = R(x,t) u(x,0)`.

use crate::dirac::{
    assemble_v, f_from_v, g_from_v, propagate_r_on_grid, propagate_u_on_grid, BoundaryValues, PlaneWave,
    PotentialProfile, Signature, SpectralParameter,
};
use crate::error::{Error, Result};
use crate::linalg::{identity, op_norm, CMat, C64, I};

/// Closed-form solution families.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    Zero(Signature),
    PlaneWave(PlaneWave),
}

impl ClosedForm {
    pub fn signature(&self) -> Signature {
        match self {
            ClosedForm::Zero(sig) => *sig,
            ClosedForm::PlaneWave(p) => PotentialProfile::PlaneWave(p.clone()).signature(),
        }
    }

    pub fn value(&self, x: f64, t: f64) -> CMat {
        match self {
            ClosedForm::Zero(sig) => CMat::zeros(sig.m1(), sig.m2()),
            ClosedForm::PlaneWave(p) => p.value(x, t),
        }
    }

    pub fn dx(&self, x: f64, t: f64) -> CMat {
        match self {
            ClosedForm::Zero(sig) => CMat::zeros(sig.m1(), sig.m2()),
            ClosedForm::PlaneWave(p) => p.dx(x, t),
        }
    }

    /// `v(·, t)` as an `x`-profile.
    pub fn profile_at(&self, t: f64) -> PotentialProfile {
        match self {
            ClosedForm::Zero(sig) => PotentialProfile::Zero(*sig),
            ClosedForm::PlaneWave(p) => PotentialProfile::PlaneWave(p.at_time(t)),
        }
    }

    /// `(v, v_x)` along the line `x = const`.
    pub fn line(&self, x: f64) -> FieldLine<'_> {
        FieldLine { field: self, x }
    }
}

/// `v(x, ·)`, `v_x(x, ·)` of a closed-form field at fixed `x`.
#[derive(Debug, Clone, Copy)]
pub struct FieldLine<'a> {
    field: &'a ClosedForm,
    x: f64,
}

impl BoundaryValues for FieldLine<'_> {
    fn signature(&self) -> Signature {
        self.field.signature()
    }

    fn values_at(&self, t: f64) -> (CMat, CMat) {
        (self.field.value(self.x, t), self.field.dx(self.x, t))
    }
}

/// The dNLS plane wave `q e^{i(kx - ωt)}` with `ω = (k² + 2γ²)/2`; `q = 0` gives
/// the zero field.
pub fn plane_wave(q: &CMat, k: f64) -> Result<ClosedForm> {
    let gamma = crate::dirac::equal_singular_values(q)?;
    if gamma == 0.0 {
        let sig = Signature::new(q.nrows(), q.ncols())?;
        return Ok(ClosedForm::Zero(sig));
    }
    Ok(ClosedForm::PlaneWave(PlaneWave::new(q.clone(), k, (k * k + 2.0 * gamma * gamma) / 2.0)?))
}

/// A plane wave whose frequency is off the dispersion relation by `delta`.
pub fn perturbed_plane_wave(q: &CMat, k: f64, delta: f64) -> Result<ClosedForm> {
    let gamma = crate::dirac::equal_singular_values(q)?;
    Ok(ClosedForm::PlaneWave(PlaneWave::new(q.clone(), k, (k * k + 2.0 * gamma * gamma) / 2.0 + delta)?))
}

/// `v(x_i, t_j)` on uniform grids; `values[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub sig: Signature,
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub values: Vec<Vec<CMat>>,
    pub closed_form: Option<ClosedForm>,
}

fn uniform(start: f64, h: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| start + h * i as f64).collect()
}

impl SolutionField {
    /// Samples of a closed-form field on `x = x0 + i h_x`, `t = t0 + j h_t`.
    pub fn sample(eval: &ClosedForm, (x0, h_x, nx): (f64, f64, usize), (t0, h_t, nt): (f64, f64, usize)) -> Result<Self> {
        if !(h_x > 0.0) || !(h_t > 0.0) {
            return Err(Error::InvalidArgument("grid spacings must be positive".into()));
        }
        let x_grid = uniform(x0, h_x, nx);
        let t_grid = uniform(t0, h_t, nt);
        let values = x_grid.iter().map(|&x| t_grid.iter().map(|&t| eval.value(x, t)).collect()).collect();
        Ok(Self { sig: eval.signature(), x_grid, t_grid, values, closed_form: Some(eval.clone()) })
    }

    /// A field from raw samples on uniform grids.
    pub fn from_samples(sig: Signature, x_grid: Vec<f64>, t_grid: Vec<f64>, values: Vec<Vec<CMat>>) -> Result<Self> {
        if values.len() != x_grid.len() || values.iter().any(|row| row.len() != t_grid.len()) {
            return Err(Error::InvalidArgument("value table does not match the grids".into()));
        }
        for row in &values {
            for v in row {
                sig.check_potential(v)?;
                if v.iter().any(|z| !z.is_finite()) {
                    return Err(Error::NonFiniteInput("field sample".into()));
                }
            }
        }
        Ok(Self { sig, x_grid, t_grid, values, closed_form: None })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().flatten().map(op_norm).fold(0.0, f64::max)
    }

    fn spacing(grid: &[f64], axis: &str) -> Result<f64> {
        if grid.len() < 3 {
            return Err(Error::GridTooCoarse(format!("{axis} grid has {} points, need at least 3", grid.len())));
        }
        let h = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
        let uniform = grid.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300));
        if !(h > 0.0) || !uniform {
            return Err(Error::InvalidArgument(format!("{axis} grid must be uniform and increasing")));
        }
        Ok(h)
    }

    fn spacings(&self) -> Result<(f64, f64)> {
        Ok((Self::spacing(&self.x_grid, "x")?, Self::spacing(&self.t_grid, "t")?))
    }
}

/// First derivative along a uniform line: central in the interior,
/// second-order one-sided at both ends.
fn line_derivative(vals: &[CMat], h: f64) -> Vec<CMat> {
    let n = vals.len();
    let s = C64::new(1.0 / (2.0 * h), 0.0);
    (0..n)
        .map(|i| {
            if i == 0 {
                (&vals[1] * C64::new(4.0, 0.0) - &vals[0] * C64::new(3.0, 0.0) - &vals[2]) * s
            } else if i == n - 1 {
                (&vals[n - 1] * C64::new(3.0, 0.0) - &vals[n - 2] * C64::new(4.0, 0.0) + &vals[n - 3]) * s
            } else {
                (&vals[i + 1] - &vals[i - 1]) * s
            }
        })
        .collect()
}

/// `max ‖2v_t - i(v_xx - 2 v v* v)‖` over interior grid points.
pub fn dnls_residual(field: &SolutionField) -> Result<f64> {
    let (hx, ht) = field.spacings()?;
    let (nx, nt) = (field.x_grid.len(), field.t_grid.len());
    let v = &field.values;
    let mut worst: f64 = 0.0;
    for i in 1..nx - 1 {
        for j in 1..nt - 1 {
            let vt = (&v[i][j + 1] - &v[i][j - 1]) * C64::new(1.0 / (2.0 * ht), 0.0);
            let vxx = (&v[i + 1][j] - &v[i][j] * C64::new(2.0, 0.0) + &v[i - 1][j]) * C64::new(1.0 / (hx * hx), 0.0);
            let cube = &v[i][j] * v[i][j].adjoint() * &v[i][j];
            let r = vt * C64::new(2.0, 0.0) - (vxx - cube * C64::new(2.0, 0.0)) * I;
            worst = worst.max(op_norm(&r));
        }
    }
    Ok(worst)
}

/// `max ‖G_t - F_x + GF - FG‖` over interior grid points. `v_x` comes from the
/// closed form when present, else from finite differences.
pub fn zero_curvature_residual(field: &SolutionField, z: SpectralParameter) -> Result<f64> {
    let (hx, ht) = field.spacings()?;
    let sig = field.sig;
    let (nx, nt) = (field.x_grid.len(), field.t_grid.len());
    let zv = z.value();
    let vx: Vec<Vec<CMat>> = match &field.closed_form {
        Some(cf) => field
            .x_grid
            .iter()
            .map(|&x| field.t_grid.iter().map(|&t| cf.dx(x, t)).collect())
            .collect(),
        None => {
            let mut out = vec![Vec::with_capacity(nt); nx];
            for j in 0..nt {
                let col: Vec<CMat> = (0..nx).map(|i| field.values[i][j].clone()).collect();
                for (i, d) in line_derivative(&col, hx).into_iter().enumerate() {
                    out[i].push(d);
                }
            }
            out
        }
    };
    let big = |m: &CMat| assemble_v(m, sig);
    let mut g = Vec::with_capacity(nx);
    let mut f = Vec::with_capacity(nx);
    for i in 0..nx {
        let mut grow = Vec::with_capacity(nt);
        let mut frow = Vec::with_capacity(nt);
        for j in 0..nt {
            let bv = big(&field.values[i][j])?;
            let bvx = big(&vx[i][j])?;
            grow.push(g_from_v(zv, &bv, sig));
            frow.push(f_from_v(zv, &bv, &bvx, sig));
        }
        g.push(grow);
        f.push(frow);
    }
    let mut worst: f64 = 0.0;
    for i in 1..nx - 1 {
        for j in 1..nt - 1 {
            let gt = (&g[i][j + 1] - &g[i][j - 1]) * C64::new(1.0 / (2.0 * ht), 0.0);
            let fx = (&f[i + 1][j] - &f[i - 1][j]) * C64::new(1.0 / (2.0 * hx), 0.0);
            let comm = &g[i][j] * &f[i][j] - &f[i][j] * &g[i][j];
            worst = worst.max(op_norm(&(gt - fx + comm)));
        }
    }
    Ok(worst)
}

/// `‖u(x,t) R(t) - R(x,t) u(x,0)‖ / ‖u(x,t) R(t)‖` with every factor propagated
/// independently at integrator tolerance `tol`.
pub fn factorization_residual(field: &ClosedForm, z: SpectralParameter, x: f64, t: f64, tol: f64) -> Result<f64> {
    if !(x >= 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidArgument("factorization needs x >= 0 and t >= 0".into()));
    }
    let m = field.signature().m();
    let u_at = |time: f64| -> Result<CMat> {
        if x == 0.0 {
            return Ok(identity(m));
        }
        Ok(propagate_u_on_grid(&field.profile_at(time), z, &[0.0, x], tol)?.value(1))
    };
    let r_at = |line_x: f64| -> Result<CMat> {
        if t == 0.0 {
            return Ok(identity(m));
        }
        Ok(propagate_r_on_grid(&field.line(line_x), z, &[0.0, t], tol)?.value(1))
    };
    let lhs = u_at(t)? * r_at(0.0)?;
    let rhs = r_at(x)? * u_at(0.0)?;
    Ok(op_norm(&(&lhs - rhs)) / op_norm(&lhs))
}
