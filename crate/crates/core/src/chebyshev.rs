//! Complex Chebyshev series on an interval `[a, b]` and matrix-valued series
//! built from them. Differentiation is exact on the coefficients; products are
//! formed pointwise on a collocation grid and re-fitted.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

/// Trailing coefficients below this fraction of the largest one are dropped.
pub const CHOP_REL: f64 = 1e-15;

/// First-kind Chebyshev points on `[a, b]` (`n` of them, ascending).
pub fn chebyshev_points(n: usize, a: f64, b: f64) -> Vec<f64> {
    (0..n)
        .rev()
        .map(|k| {
            let x = (PI * (k as f64 + 0.5) / n as f64).cos();
            a + (b - a) * (x + 1.0) * 0.5
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries {
    coeffs: Vec<C64>,
    a: f64,
    b: f64,
}

impl ChebSeries {
    pub fn from_coeffs(coeffs: Vec<C64>, a: f64, b: f64) -> Self {
        let coeffs = if coeffs.is_empty() { vec![C64::new(0.0, 0.0)] } else { coeffs };
        Self { coeffs, a, b }
    }

    pub fn constant(c: C64, a: f64, b: f64) -> Self {
        Self::from_coeffs(vec![c], a, b)
    }

    /// Interpolant of degree `degree` through values at the first-kind points
    /// returned by [`chebyshev_points`]`(degree + 1, a, b)`.
    pub fn from_point_values(values: &[C64], a: f64, b: f64) -> Self {
        let n = values.len();
        let mut coeffs = vec![C64::new(0.0, 0.0); n];
        // values are ascending in t, i.e. descending in the cosine index
        for (j, cj) in coeffs.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (idx, v) in values.iter().enumerate() {
                let k = n - 1 - idx;
                // reduce j(2k+1) modulo 4n so the cosine argument stays in [0, 2π)
                let idx = (j * (2 * k + 1)) % (4 * n);
                acc += v * (PI * idx as f64 / (2 * n) as f64).cos();
            }
            *cj = acc * (2.0 / n as f64);
        }
        coeffs[0] *= 0.5;
        Self { coeffs, a, b }
    }

    pub fn interpolate<F: Fn(f64) -> C64>(f: F, degree: usize, a: f64, b: f64) -> Self {
        let pts = chebyshev_points(degree + 1, a, b);
        let values: Vec<C64> = pts.iter().map(|&t| f(t)).collect();
        Self::from_point_values(&values, a, b)
    }

    /// Least-squares fit of the given degree to scattered samples.
    pub fn fit_least_squares(t: &[f64], y: &[C64], degree: usize, a: f64, b: f64) -> Result<Self> {
        if t.len() != y.len() || t.len() < degree + 1 {
            return Err(Error::InvalidArgument(format!(
                "least-squares fit of degree {degree} needs at least {} samples, got {}",
                degree + 1,
                t.len()
            )));
        }
        let n = degree + 1;
        let mut vander = CMat::zeros(t.len(), n);
        for (r, &tv) in t.iter().enumerate() {
            let x = (2.0 * tv - a - b) / (b - a);
            let (mut p0, mut p1) = (1.0, x);
            for c in 0..n {
                let val = if c == 0 {
                    1.0
                } else if c == 1 {
                    x
                } else {
                    let p2 = 2.0 * x * p1 - p0;
                    p0 = p1;
                    p1 = p2;
                    p2
                };
                vander[(r, c)] = C64::new(val, 0.0);
            }
        }
        let rhs = CMat::from_column_slice(t.len(), 1, y);
        let svd = vander.svd(true, true);
        let sol = svd
            .solve(&rhs, 1e-13)
            .map_err(|e| Error::InvalidArgument(format!("least-squares fit failed: {e}")))?;
        Ok(Self { coeffs: sol.iter().cloned().collect(), a, b })
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, t: f64) -> C64 {
        let x = (2.0 * t - self.a - self.b) / (self.b - self.a);
        let mut b1 = C64::new(0.0, 0.0);
        let mut b2 = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + b1 * (2.0 * x) - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + b1 * x - b2
    }

    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        if n == 1 {
            return Self::constant(C64::new(0.0, 0.0), self.a, self.b);
        }
        let mut d = vec![C64::new(0.0, 0.0); n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + self.coeffs[k] * (2.0 * k as f64);
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        let scale = 2.0 / (self.b - self.a);
        Self {
            coeffs: d.into_iter().map(|c| c * scale).collect(),
            a: self.a,
            b: self.b,
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
            a: self.a,
            b: self.b,
        }
    }

    /// Drop trailing coefficients with magnitude `≤ rel · reference`.
    pub fn chop(&mut self, rel: f64, reference: f64) {
        let cut = rel * reference;
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().norm() <= cut {
            self.coeffs.pop();
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * s).collect(), a: self.a, b: self.b }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or_default() + other.coeffs.get(k).copied().unwrap_or_default()
            })
            .collect();
        Self { coeffs, a: self.a, b: self.b }
    }
}

/// `rows x cols` matrix of Chebyshev series sharing one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSeries {
    rows: usize,
    cols: usize,
    entries: Vec<ChebSeries>,
}

impl MatrixSeries {
    pub fn zeros(rows: usize, cols: usize, a: f64, b: f64) -> Self {
        Self {
            rows,
            cols,
            entries: vec![ChebSeries::constant(C64::new(0.0, 0.0), a, b); rows * cols],
        }
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<ChebSeries>) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self { rows, cols, entries }
    }

    /// Interpolate a matrix function at `degree + 1` Chebyshev points.
    pub fn interpolate<F: Fn(f64) -> CMat>(f: F, rows: usize, cols: usize, degree: usize, a: f64, b: f64) -> Self {
        let pts = chebyshev_points(degree + 1, a, b);
        let samples: Vec<CMat> = pts.iter().map(|&t| f(t)).collect();
        Self::from_point_values(&samples, rows, cols, a, b)
    }

    pub fn from_point_values(samples: &[CMat], rows: usize, cols: usize, a: f64, b: f64) -> Self {
        let entries = (0..rows * cols)
            .map(|idx| {
                let (r, c) = (idx / cols, idx % cols);
                let vals: Vec<C64> = samples.iter().map(|s| s[(r, c)]).collect();
                ChebSeries::from_point_values(&vals, a, b)
            })
            .collect();
        Self { rows, cols, entries }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn interval(&self) -> (f64, f64) {
        self.entries[0].interval()
    }

    pub fn entry(&self, r: usize, c: usize) -> &ChebSeries {
        &self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[ChebSeries] {
        &self.entries
    }

    pub fn eval(&self, t: f64) -> CMat {
        CMat::from_fn(self.rows, self.cols, |r, c| self.entry(r, c).eval(t))
    }

    pub fn derivative(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.derivative()).collect(),
        }
    }

    pub fn max_coeff(&self) -> f64 {
        self.entries.iter().map(|e| e.max_coeff()).fold(0.0, f64::max)
    }

    pub fn degree(&self) -> usize {
        self.entries.iter().map(|e| e.degree()).max().unwrap_or(0)
    }

    /// Chop every entry against the largest coefficient of the whole matrix.
    pub fn chop(&mut self, rel: f64) {
        let reference = self.max_coeff();
        for e in &mut self.entries {
            e.chop(rel, reference);
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.scaled(s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect(),
        }
    }

    /// Sup of the operator norm over a dense check grid.
    pub fn sup_norm(&self, points: usize) -> f64 {
        let (a, b) = self.interval();
        (0..=points)
            .map(|i| a + (b - a) * i as f64 / points as f64)
            .map(|t| crate::linalg::op_norm(&self.eval(t)))
            .fold(0.0, f64::max)
    }
}
