//! Legendre–Fenchel transform restricted to `[0, 1]`:
//! `Sigma(z) = sup_{x in [0,1]} (x ln z - S(x))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::piecewise::PiecewiseFunction;

const DOMAIN: (f64, f64) = (0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugatePair {
    pub sigma_value: f64,
    pub maximizer_x: f64,
    pub interior_flag: bool,
}

/// Exact supremum by enumerating per-piece roots of `S'(x) = ln z` and the
/// piece endpoints. For a non-convex `S` this is the value of the convex
/// envelope, and an interior maximiser need not be a stationary point of `S`.
pub fn legendre_fenchel(s: &PiecewiseFunction, z: f64) -> Result<ConjugatePair> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidInput(format!("z must be positive, got {z}")));
    }
    let y = z.ln();
    let shifted = s.add_linear(0.0, -y)?;
    let (x, v) = shifted.minimum(DOMAIN.0, DOMAIN.1)?;
    Ok(ConjugatePair {
        sigma_value: -v,
        maximizer_x: x,
        interior_flag: x > DOMAIN.0 && x < DOMAIN.1,
    })
}

/// `S'` at the ends of `[0, 1]`, one-sided from inside.
pub fn boundary_slopes(s: &PiecewiseFunction) -> (f64, f64) {
    (s.derivative(DOMAIN.0, 1), left_derivative(s, DOMAIN.1, 1))
}

pub(crate) fn left_derivative(s: &PiecewiseFunction, x: f64, order: usize) -> f64 {
    match s.pieces().iter().find(|p| p.a < x && p.b >= x) {
        Some(p) => p.eval_derivative(x, order),
        None => s.derivative(x, order),
    }
}

/// Checks that `S'` is strictly increasing on `(0, 1)`: `S'' >= 0` on every
/// piece with only isolated zeros, and no downward jumps of `S'` at joints.
pub fn check_strictly_convex(s: &PiecewiseFunction) -> Result<()> {
    let mut prev_slope: Option<f64> = None;
    let mut covered = false;
    for p in s.pieces() {
        let a = p.a.max(DOMAIN.0);
        let b = p.b.min(DOMAIN.1);
        if a >= b {
            continue;
        }
        covered = true;
        let second = p.poly.nth_derivative(2);
        if second.is_zero() {
            return Err(Error::NotMonotone);
        }
        let mut knots = vec![a];
        knots.extend(p.derivative_roots(2, a, b));
        knots.push(b);
        for w in knots.windows(2) {
            if w[1] > w[0] && p.eval_derivative(0.5 * (w[0] + w[1]), 2) < 0.0 {
                return Err(Error::NotMonotone);
            }
        }
        let start = p.eval_derivative(a, 1);
        if let Some(prev) = prev_slope {
            if start < prev - 1e-12 * (1.0 + prev.abs()) {
                return Err(Error::NotMonotone);
            }
        }
        prev_slope = Some(p.eval_derivative(b, 1));
    }
    if covered {
        Ok(())
    } else {
        Err(Error::EmptyDomain)
    }
}

/// The unique `x(z)` in `(0, 1)` with `S'(x) = ln z`, or `None` when `ln z`
/// lies outside `(S'(0), S'(1))`.
pub fn conjugate_point(s: &PiecewiseFunction, z: f64) -> Result<Option<f64>> {
    if !(z > 0.0) {
        return Err(Error::InvalidInput(format!("z must be positive, got {z}")));
    }
    check_strictly_convex(s)?;
    let y = z.ln();
    let (lo, hi) = boundary_slopes(s);
    if !(y > lo && y < hi) {
        return Ok(None);
    }
    for p in s.pieces() {
        let a = p.a.max(DOMAIN.0);
        let b = p.b.min(DOMAIN.1);
        if a >= b {
            continue;
        }
        let (da, db) = (p.eval_derivative(a, 1), p.eval_derivative(b, 1));
        if y < da {
            // S' jumps over y at a joint: the subgradient contains y there.
            return Ok(Some(a));
        }
        if y <= db {
            return Ok(Some(solve_monotone(|x| p.eval_derivative(x, 1) - y, |x| p.eval_derivative(x, 2), a, b)));
        }
    }
    Ok(None)
}

/// Safeguarded Newton on an increasing function with a sign change in `[a, b]`.
fn solve_monotone(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx > 0.0 {
            b = x;
        } else {
            a = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d > 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || b - a <= 1e-15 {
            return next;
        }
        x = next;
    }
    x
}
