//! Central finite differences of arbitrary order with Richardson extrapolation.
//!
//! The `j`-th central difference `Σ_k (−1)^k C(j,k) f(x + (j/2 − k)h) / h^j`
//! has an error expansion in even powers of `h`, so a Neville tableau over a
//! geometric sequence of steps removes it term by term. The tableau stops once
//! successive diagonals disagree more than the best estimate so far, which is
//! where rounding noise takes over.

use crate::error::{Error, Result};

/// A derivative estimate and its extrapolation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub error: f64,
}

const SHRINK: f64 = 1.4;
const LEVELS: usize = 12;
const SAFE: f64 = 2.0;
/// Large starting steps make the first diagonals erratic; never stop before this.
const MIN_LEVELS: usize = 5;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn central_difference(f: &impl Fn(f64) -> f64, x: f64, order: usize, h: f64) -> f64 {
    let half = order as f64 / 2.0;
    let mut acc = 0.0;
    for k in 0..=order {
        let c = binomial(order, k);
        let v = f(x + (half - k as f64) * h);
        acc += if k % 2 == 0 { c * v } else { -c * v };
    }
    acc / h.powi(order as i32)
}

/// Estimates the `order`-th derivative of `f` at `x`, starting from step
/// `step`. The stencil reaches `x ± order·step/2`, so `step` must keep it
/// inside the domain of `f`.
pub fn derivative(f: impl Fn(f64) -> f64, x: f64, order: usize, step: f64) -> Result<Derivative> {
    if order == 0 {
        let v = f(x);
        return finite(v, x).map(|value| Derivative { value, error: 0.0 });
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid(format!(
            "finite-difference step must be > 0, got {step}"
        )));
    }
    let mut h = step;
    let mut prev: Vec<f64> = vec![finite(central_difference(&f, x, order, h), x)?];
    let mut best = Derivative {
        value: prev[0],
        error: f64::INFINITY,
    };
    for _ in 1..LEVELS {
        h /= SHRINK;
        let mut row = Vec::with_capacity(prev.len() + 1);
        row.push(finite(central_difference(&f, x, order, h), x)?);
        let mut fac = SHRINK * SHRINK;
        for j in 1..=prev.len() {
            let r = (row[j - 1] * fac - prev[j - 1]) / (fac - 1.0);
            fac *= SHRINK * SHRINK;
            let err = (r - row[j - 1]).abs().max((r - prev[j - 1]).abs());
            if err <= best.error {
                best = Derivative {
                    value: r,
                    error: err,
                };
            }
            row.push(r);
        }
        let last = row.len() - 1;
        if last >= MIN_LEVELS && (row[last] - prev[last - 1]).abs() >= SAFE * best.error {
            break;
        }
        prev = row;
    }
    Ok(best)
}

fn finite(v: f64, x: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!(
            "non-finite function value in finite difference at x = {x}"
        )))
    }
}

/// Starting step for an `order`-th derivative of a function on `(0, ∞)`: the
/// stencil stays within `[0.6x, 1.4x]`.
pub fn positive_step(x: f64, order: usize) -> f64 {
    0.8 * x / order.max(1) as f64
}

/// Starting step for an `order`-th derivative of a function on the real line.
pub fn real_line_step(x: f64, order: usize) -> f64 {
    0.8 * x.abs().max(1.0) / order.max(1) as f64
}
