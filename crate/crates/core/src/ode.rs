//! Adaptive Dormand–Prince 5(4) integration for small fixed-size systems.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_steps: 1_000_000,
        }
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t1`.
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: OdeOptions,
) -> Result<[f64; N]> {
    if t1 == t0 {
        return Ok(y0);
    }
    let span = t1 - t0;
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * span.abs().min(0.01);
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, &y);
    let mut steps = 0usize;
    let min_step = 1e-14 * span.abs().max(1.0);
    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::IntegrationFailure(format!(
                "exceeded {} steps",
                opts.max_steps
            )));
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        for s in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][i];
                }
                *yi += h * acc;
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y_new = y;
        let mut err = 0.0f64;
        for i in 0..N {
            let mut acc = 0.0;
            let mut e = 0.0;
            for s in 0..7 {
                acc += B[s] * k[s][i];
                e += E[s] * k[s][i];
            }
            y_new[i] = y[i] + h * acc;
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((h * e / scale).abs());
        }
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.2;
            if h.abs() < min_step {
                return Err(Error::IntegrationFailure(format!(
                    "non-finite state near t = {t}"
                )));
            }
            continue;
        }
        if err <= 1.0 {
            t += h;
            y = y_new;
            k[0] = k[6];
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h.abs() < min_step {
                return Err(Error::IntegrationFailure(format!(
                    "step size collapsed near t = {t}"
                )));
            }
        }
    }
    Ok(y)
}
