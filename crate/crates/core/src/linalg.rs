//! Small dense complex linear-algebra helpers shared by the spectral modules.

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Largest singular value (induced 2-norm).
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn min_singular_value(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    hermitian_eig(m).0
}

pub fn min_hermitian_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m)
        .first()
        .copied()
        .unwrap_or(f64::INFINITY)
}

/// `m^p` for a Hermitian positive-semidefinite `m`. Negative eigenvalues are
/// clipped to zero; negative powers require strict positivity.
pub fn hermitian_pow(m: &CMat, p: f64) -> Result<CMat> {
    let (vals, vecs) = hermitian_eig(m);
    let mut scaled = vecs.clone();
    for (c, &lam) in vals.iter().enumerate() {
        let lam = lam.max(0.0);
        if p < 0.0 && lam <= 0.0 {
            return Err(Error::InvalidArgument(
                "negative power of a singular Hermitian matrix".into(),
            ));
        }
        let f = lam.powf(p);
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= f;
        }
    }
    Ok(&scaled * vecs.adjoint())
}

/// `a⁻¹ b` via LU with partial pivoting.
pub fn solve_left(a: &CMat, b: &CMat) -> Option<CMat> {
    a.clone().lu().solve(b)
}

/// `b a⁻¹`.
pub fn solve_right(b: &CMat, a: &CMat) -> Option<CMat> {
    let xt = a.transpose().lu().solve(&b.transpose())?;
    Some(xt.transpose())
}

/// Rescale `m` to unit max-entry magnitude, returning the matrix and `ln` of
/// the factor that was divided out.
pub fn normalize_max(m: &CMat) -> (CMat, f64) {
    let s = max_abs(m);
    if s == 0.0 || !s.is_finite() {
        return (m.clone(), 0.0);
    }
    (m.unscale(s), s.ln())
}

pub fn sub_block(m: &CMat, r0: usize, c0: usize, nr: usize, nc: usize) -> CMat {
    m.view((r0, c0), (nr, nc)).into_owned()
}

/// Matrix sign function by scaled Newton iteration. Requires no eigenvalue on
/// the imaginary axis.
pub fn sign_function(g: &CMat) -> Result<CMat> {
    let n = g.nrows();
    let mut x = g.clone();
    for _ in 0..100 {
        let inv = x
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Eigenstructure("singular iterate in sign iteration".into()))?;
        // determinant scaling accelerates the early iterations
        let det = x.determinant().norm();
        let mu = if det > 0.0 && det.is_finite() {
            det.powf(-1.0 / n as f64)
        } else {
            1.0
        };
        let next = (&x * C64::new(mu, 0.0) + &inv * C64::new(1.0 / mu, 0.0)) * C64::new(0.5, 0.0);
        let diff = max_abs(&(&next - &x));
        let scale = max_abs(&next).max(1.0);
        x = next;
        if !diff.is_finite() {
            break;
        }
        if diff <= 1e-14 * scale {
            let check = max_abs(&(&x * &x - identity(n)));
            if check > 1e-8 {
                return Err(Error::Eigenstructure(format!(
                    "sign iteration converged to a non-involution (residual {check:.3e})"
                )));
            }
            return Ok(x);
        }
    }
    Err(Error::Eigenstructure(
        "sign iteration did not converge; eigenvalues near the imaginary axis".into(),
    ))
}

/// Orthonormal basis (as columns) of the dominant `rank` left singular
/// directions of `m`.
pub fn dominant_column_basis(m: &CMat, rank: usize) -> CMat {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    CMat::from_fn(m.nrows(), rank, |r, c| u[(r, order[c])])
}
