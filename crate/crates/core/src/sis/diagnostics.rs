//! Checks of the semiclassical evolution against exact quantities.

use serde::{Deserialize, Serialize};

use super::{evolve_characteristics, evolve_master, Picture, ProbabilityDistribution, SemiclassicalField, SisParams};
use crate::compensated::NeumaierSum;
use crate::error::{Error, Result};

fn require_probability(field: &SemiclassicalField) -> Result<()> {
    if field.picture == Picture::Probability {
        Ok(())
    } else {
        Err(Error::InvalidInput("field must be in the probability picture".into()))
    }
}

/// `exp(-n (S(k/n) - shift)) L(k/n)` for `k = 0..=n`, zero outside the field.
fn lattice_weights(field: &SemiclassicalField, n: u64, shift: f64) -> Vec<f64> {
    let s = field.action_function();
    let l = field.amplitude_function();
    let nf = n as f64;
    (0..=n)
        .map(|k| {
            let x = k as f64 / nf;
            let sx = s.eval(x);
            if sx.is_finite() {
                (-nf * (sx - shift)).exp() * l.eval(x)
            } else {
                0.0
            }
        })
        .collect()
}

fn min_action(field: &SemiclassicalField) -> f64 {
    field.action().iter().copied().fold(f64::INFINITY, f64::min)
}

/// `sum_k exp(-n S(k/n, t)) L(k/n, t)` before and after transport to time `t`.
pub fn total_probability_drift(
    field0: &SemiclassicalField,
    t: f64,
    n: u64,
    params: &SisParams,
    tol: f64,
) -> Result<(f64, f64)> {
    require_probability(field0)?;
    let field_t = evolve_characteristics(field0, t, params, tol)?;
    let shift = min_action(field0);
    let total = |f: &SemiclassicalField| -> f64 {
        lattice_weights(f, n, shift).into_iter().collect::<NeumaierSum>().value()
    };
    let scale = (-(n as f64) * shift).exp();
    Ok((total(field0) * scale, total(&field_t) * scale))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WkbReport {
    pub n: u64,
    pub t: f64,
    pub window_lo: u64,
    pub window_hi: u64,
    pub points_compared: usize,
    /// `max_k |-ln p_k / n - S(k/n, t) - c|` over the window.
    pub max_action_error: f64,
    /// Same with the amplitude included: `-ln p_k / n - S + ln L / n - c'`.
    pub max_action_error_with_amplitude: f64,
    /// `c`, fixed at the window point where `S(., t)` is smallest.
    pub normalization_offset: f64,
}

/// Evolves `p_k(0) ~ exp(-n S(k/n, 0)) L(k/n, 0)` exactly and semiclassically
/// and compares `-ln p_k(t) / n` with `S(k/n, t)` away from the boundaries.
pub fn wkb_vs_master(
    field0: &SemiclassicalField,
    t: f64,
    n: u64,
    params: &SisParams,
    tol: f64,
) -> Result<WkbReport> {
    require_probability(field0)?;
    let params_n = SisParams::new(params.infection_rate, params.recovery_rate, n)?;
    let weights = lattice_weights(field0, n, min_action(field0));
    let p0 = ProbabilityDistribution::from_weights(weights)?;
    let field_t = evolve_characteristics(field0, t, &params_n, tol)?;
    let pt = evolve_master(&p0, t, &params_n, tol.min(1e-12))?;

    let nf = n as f64;
    let margin = (3.0 * nf.sqrt()).ceil() as u64;
    let (lo, hi) = (margin, n.saturating_sub(margin));
    let s = field_t.action_function();
    let l = field_t.amplitude_function();
    let mut points: Vec<(f64, f64, f64)> = Vec::new();
    for k in lo..=hi {
        let x = k as f64 / nf;
        let sx = s.eval(x);
        let pk = pt.probabilities()[k as usize];
        let lx = l.eval(x);
        if sx.is_finite() && pk > 0.0 && lx > 0.0 {
            let e = -pk.ln() / nf - sx;
            points.push((sx, e, e + lx.ln() / nf));
        }
    }
    let anchor = points
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .copied()
        .ok_or_else(|| Error::InvalidInput("no lattice points in the comparison window".into()))?;
    let max_dev = |f: fn(&(f64, f64, f64)) -> f64| {
        let c = f(&anchor);
        points.iter().map(|p| (f(p) - c).abs()).fold(0.0, f64::max)
    };
    Ok(WkbReport {
        n,
        t,
        window_lo: lo,
        window_hi: hi,
        points_compared: points.len(),
        max_action_error: max_dev(|p| p.1),
        max_action_error_with_amplitude: max_dev(|p| p.2),
        normalization_offset: anchor.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::PiecewiseFunction;

    fn field(centre: f64) -> SemiclassicalField {
        let s = PiecewiseFunction::polynomial_on(0.0, 1.0, vec![0.5 * centre * centre, -centre, 0.5], f64::INFINITY)
            .unwrap();
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 / 400.0).collect();
        SemiclassicalField::from_functions(Picture::Probability, grid, &s, &PiecewiseFunction::constant(1.0)).unwrap()
    }

    #[test]
    fn zero_time_drift_is_exact() {
        let p = SisParams::new(2.0, 1.0, 100).unwrap();
        let (a, b) = total_probability_drift(&field(0.4), 0.0, 100, &p, 1e-9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_time_wkb_error_is_small() {
        let p = SisParams::new(2.0, 1.0, 400).unwrap();
        let r = wkb_vs_master(&field(0.6), 0.0, 400, &p, 1e-9).unwrap();
        assert!(r.max_action_error < 1e-3, "{r:?}");
        assert!(r.points_compared > 100);
    }
}
