//! Embedded Dormand–Prince 5(4) integrator specialised to the pair of linear
//! matrix systems `Y' = A(s) Y`, `W' = -W A(s)` with `Y(s0) = W(s0) = I`.
//!
//! `W` tracks `Y⁻¹` without ever inverting `Y`. Both are kept below
//! [`RENORM_THRESHOLD`] by scalar renormalisation; the divided-out factors are
//! accumulated as logarithms.

use crate::error::{Error, Result};
use crate::linalg::{identity, max_abs, CMat, C64};

pub(crate) const RENORM_THRESHOLD: f64 = 1e100;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 5_000_000;

#[derive(Debug, Clone)]
pub(crate) struct PairSolution {
    pub grid: Vec<f64>,
    pub values: Vec<CMat>,
    pub inverse: Vec<CMat>,
    pub scale_log: Vec<f64>,
    pub inverse_scale_log: Vec<f64>,
    pub steps: usize,
}

pub(crate) enum Output<'a> {
    /// Record exactly at these points; the first is the initial point.
    Grid(&'a [f64]),
    /// Record every accepted step from `start` to `end`.
    Steps { start: f64, end: f64 },
}

fn lin(terms: &[(f64, &CMat)]) -> CMat {
    let mut acc = terms[0].1 * C64::new(terms[0].0, 0.0);
    for (c, m) in &terms[1..] {
        if *c != 0.0 {
            acc.zip_apply(m, |a, b| *a += b * *c);
        }
    }
    acc
}

fn error_ratio(err: &CMat, old: &CMat, new: &CMat, tol: f64) -> f64 {
    let floor = 1e-8 * max_abs(new).max(max_abs(old));
    let mut worst: f64 = 0.0;
    for ((e, a), b) in err.iter().zip(old.iter()).zip(new.iter()) {
        let sc = tol * a.norm().max(b.norm()).max(floor);
        if sc > 0.0 {
            worst = worst.max(e.norm() / sc);
        }
    }
    worst
}

fn renormalize(m: &mut CMat, log: &mut f64) {
    let s = max_abs(m);
    if s > RENORM_THRESHOLD {
        m.unscale_mut(s);
        *log += s.ln();
    }
}

pub(crate) fn integrate_pair<F>(
    coef: F,
    m: usize,
    output: Output<'_>,
    tol: f64,
    coordinate: &'static str,
) -> Result<PairSolution>
where
    F: Fn(f64) -> CMat,
{
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let (start, targets): (f64, Vec<f64>) = match &output {
        Output::Grid(g) => {
            if g.is_empty() {
                return Err(Error::InvalidArgument("empty output grid".into()));
            }
            if g.windows(2).any(|w| !(w[1] > w[0])) || g.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("output grid must be strictly increasing".into()));
            }
            (g[0], g[1..].to_vec())
        }
        Output::Steps { start, end } => {
            if !(end > start) || !end.is_finite() || !start.is_finite() {
                return Err(Error::InvalidArgument(format!("invalid span [{start}, {end}]")));
            }
            (*start, vec![*end])
        }
    };
    let record_steps = matches!(output, Output::Steps { .. });

    let mut sol = PairSolution {
        grid: vec![start],
        values: vec![identity(m)],
        inverse: vec![identity(m)],
        scale_log: vec![0.0],
        inverse_scale_log: vec![0.0],
        steps: 0,
    };
    if targets.is_empty() {
        return Ok(sol);
    }

    let mut s = start;
    let mut y = identity(m);
    let mut w = identity(m);
    let mut ylog = 0.0;
    let mut wlog = 0.0;
    let mut a1 = coef(s);
    let span = targets.last().unwrap() - start;
    let mut h = (0.05 / max_abs(&a1).max(1e-3)).min(span);

    for &target in &targets {
        while s < target {
            let remaining = target - s;
            let landing = h >= remaining * (1.0 - 1e-12);
            let step = if landing { remaining } else { h };
            if step < 1e-13 * s.abs().max(1.0) && !landing {
                return Err(Error::StepUnderflow { coordinate, location: s, step });
            }
            if sol.steps > MAX_STEPS {
                return Err(Error::StepUnderflow { coordinate, location: s, step });
            }

            let k1 = &a1 * &y;
            let l1 = -(&w * &a1);
            let a2 = coef(s + C2 * step);
            let y2 = lin(&[(1.0, &y), (step * A21, &k1)]);
            let w2 = lin(&[(1.0, &w), (step * A21, &l1)]);
            let k2 = &a2 * &y2;
            let l2 = -(&w2 * &a2);
            let a3 = coef(s + C3 * step);
            let y3 = lin(&[(1.0, &y), (step * A31, &k1), (step * A32, &k2)]);
            let w3 = lin(&[(1.0, &w), (step * A31, &l1), (step * A32, &l2)]);
            let k3 = &a3 * &y3;
            let l3 = -(&w3 * &a3);
            let a4 = coef(s + C4 * step);
            let y4 = lin(&[(1.0, &y), (step * A41, &k1), (step * A42, &k2), (step * A43, &k3)]);
            let w4 = lin(&[(1.0, &w), (step * A41, &l1), (step * A42, &l2), (step * A43, &l3)]);
            let k4 = &a4 * &y4;
            let l4 = -(&w4 * &a4);
            let a5 = coef(s + C5 * step);
            let y5 = lin(&[
                (1.0, &y),
                (step * A51, &k1),
                (step * A52, &k2),
                (step * A53, &k3),
                (step * A54, &k4),
            ]);
            let w5 = lin(&[
                (1.0, &w),
                (step * A51, &l1),
                (step * A52, &l2),
                (step * A53, &l3),
                (step * A54, &l4),
            ]);
            let k5 = &a5 * &y5;
            let l5 = -(&w5 * &a5);
            let a6 = coef(s + step);
            let y6 = lin(&[
                (1.0, &y),
                (step * A61, &k1),
                (step * A62, &k2),
                (step * A63, &k3),
                (step * A64, &k4),
                (step * A65, &k5),
            ]);
            let w6 = lin(&[
                (1.0, &w),
                (step * A61, &l1),
                (step * A62, &l2),
                (step * A63, &l3),
                (step * A64, &l4),
                (step * A65, &l5),
            ]);
            let k6 = &a6 * &y6;
            let l6 = -(&w6 * &a6);
            let y_new = lin(&[
                (1.0, &y),
                (step * B1, &k1),
                (step * B3, &k3),
                (step * B4, &k4),
                (step * B5, &k5),
                (step * B6, &k6),
            ]);
            let w_new = lin(&[
                (1.0, &w),
                (step * B1, &l1),
                (step * B3, &l3),
                (step * B4, &l4),
                (step * B5, &l5),
                (step * B6, &l6),
            ]);
            let k7 = &a6 * &y_new;
            let l7 = -(&w_new * &a6);
            let ey = lin(&[
                (step * E1, &k1),
                (step * E3, &k3),
                (step * E4, &k4),
                (step * E5, &k5),
                (step * E6, &k6),
                (step * E7, &k7),
            ]);
            let ew = lin(&[
                (step * E1, &l1),
                (step * E3, &l3),
                (step * E4, &l4),
                (step * E5, &l5),
                (step * E6, &l6),
                (step * E7, &l7),
            ]);
            let ratio = error_ratio(&ey, &y, &y_new, tol).max(error_ratio(&ew, &w, &w_new, tol));
            if !ratio.is_finite() {
                if max_abs(&y_new).is_finite() && max_abs(&w_new).is_finite() {
                    h = step * 0.2;
                    continue;
                }
                return Err(Error::NonFinite { coordinate, location: s });
            }
            sol.steps += 1;
            if ratio <= 1.0 {
                s = if landing { target } else { s + step };
                y = y_new;
                w = w_new;
                a1 = a6;
                renormalize(&mut y, &mut ylog);
                renormalize(&mut w, &mut wlog);
                let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
                // a landing step may be artificially short; do not let it shrink h
                h = if landing { h.max(step * grow) } else { step * grow };
                if record_steps && s < target {
                    sol.grid.push(s);
                    sol.values.push(y.clone());
                    sol.inverse.push(w.clone());
                    sol.scale_log.push(ylog);
                    sol.inverse_scale_log.push(wlog);
                }
            } else {
                h = step * (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-13 * s.abs().max(1.0) {
                    return Err(Error::StepUnderflow { coordinate, location: s, step: h });
                }
            }
        }
        sol.grid.push(target);
        sol.values.push(y.clone());
        sol.inverse.push(w.clone());
        sol.scale_log.push(ylog);
        sol.inverse_scale_log.push(wlog);
    }
    Ok(sol)
}
