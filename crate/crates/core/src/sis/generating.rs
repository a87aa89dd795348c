//! Generating function `Gamma(z) = sum_k p_k z^k`: the exact sum and its
//! semiclassical form `Gamma ~ d_n exp(n Sigma(z)) Lambda(z)` for
//! `p_k ~ exp(-n S(k/n)) L(k/n)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{master::ProbabilityDistribution, Picture, SemiclassicalField};
use crate::compensated::NeumaierSum;
use crate::error::{Error, Result};
use crate::legendre::{boundary_slopes, check_strictly_convex, left_derivative, legendre_fenchel};
use crate::piecewise::{Piece, PiecewiseFunction};
use crate::series::{eval_series_scaled, ScaledSum, SeriesOptions, SeriesProblem};

const SLOPE_BAND: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratingRegime {
    /// `ln z < S'(0)`: the sum is dominated by the first few `k`.
    BoundaryLeft,
    /// `ln z = S'(0)`: half a Gaussian at `x = 0`.
    CriticalLeft,
    /// `S'(0) < ln z < S'(1)`: Gaussian around the conjugate point.
    Interior,
    /// `ln z = S'(1)`: half a Gaussian at `x = 1`.
    CriticalRight,
    /// `ln z > S'(1)`: dominated by the last few `k`.
    BoundaryRight,
}

impl GeneratingRegime {
    /// Whether the prediction carries the `sqrt(2 pi n)` factor.
    pub fn is_gaussian(&self) -> bool {
        matches!(self, Self::CriticalLeft | Self::Interior | Self::CriticalRight)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratingAsymptotics {
    pub sigma: f64,
    pub lambda: f64,
    pub regime: GeneratingRegime,
    pub maximizer: f64,
}

impl GeneratingAsymptotics {
    /// Prediction as `mantissa * exp(log_scale)`.
    pub fn prediction_scaled(&self, n: u64) -> (f64, f64) {
        let d = if self.regime.is_gaussian() {
            (2.0 * PI * n as f64).sqrt()
        } else {
            1.0
        };
        (d * self.lambda, n as f64 * self.sigma)
    }

    pub fn prediction(&self, n: u64) -> f64 {
        let (m, l) = self.prediction_scaled(n);
        m * l.exp()
    }
}

fn check_amplitude(l: &PiecewiseFunction) -> Result<()> {
    let vanishes = || Error::HypothesisViolated("amplitude vanishes on [0, 1]".into());
    if !l.is_finite_on(0.0, 1.0) {
        return Err(Error::HypothesisViolated("amplitude is not finite on [0, 1]".into()));
    }
    for p in l.pieces() {
        let (a, b) = (p.a.max(0.0), p.b.min(1.0));
        if a > b {
            continue;
        }
        if p.poly.is_zero() || !p.derivative_roots(0, a, b).is_empty() {
            return Err(vanishes());
        }
    }
    if l.outside() == 0.0 && !l.pieces().iter().any(|p| p.a <= 0.0 && p.b >= 1.0) {
        // Coverage gaps would expose the zero outside value.
        let mut reach = 0.0;
        for p in l.pieces() {
            if p.a > reach {
                return Err(vanishes());
            }
            reach = reach.max(p.b);
        }
        if reach < 1.0 {
            return Err(vanishes());
        }
    }
    if [0.0, 1.0].iter().any(|&x| l.eval(x) == 0.0) {
        return Err(vanishes());
    }
    Ok(())
}

/// Semiclassical generating function for an action `S` and amplitude `L` on
/// `[0, 1]`, selecting the regime by comparing `ln z` with `S'(0)` and `S'(1)`.
pub fn semiclassical_generating_fn(
    s: &PiecewiseFunction,
    l: &PiecewiseFunction,
    z: f64,
) -> Result<GeneratingAsymptotics> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::InvalidInput(format!("z must be positive, got {z}")));
    }
    check_strictly_convex(s).map_err(|e| match e {
        Error::NotMonotone => Error::HypothesisViolated("S'' changes sign on (0, 1)".into()),
        other => other,
    })?;
    check_amplitude(l)?;
    let y = z.ln();
    let (s0, s1) = boundary_slopes(s);
    let pair = legendre_fenchel(s, z)?;
    let near = |a: f64, b: f64| (a - b).abs() <= SLOPE_BAND * (1.0 + b.abs());
    let (regime, lambda) = if near(y, s0) {
        (
            GeneratingRegime::CriticalLeft,
            l.eval(0.0) / (2.0 * s.derivative(0.0, 2).sqrt()),
        )
    } else if near(y, s1) {
        (
            GeneratingRegime::CriticalRight,
            left_value(l, 1.0) / (2.0 * left_derivative(s, 1.0, 2).sqrt()),
        )
    } else if y < s0 {
        (GeneratingRegime::BoundaryLeft, l.eval(0.0) / -(y - s0).exp_m1())
    } else if y > s1 {
        (GeneratingRegime::BoundaryRight, left_value(l, 1.0) / -(s1 - y).exp_m1())
    } else {
        let x = pair.maximizer_x;
        let curvature = s.derivative(x, 2);
        if !(curvature > 0.0) {
            return Err(Error::HypothesisViolated(format!(
                "S''({x}) = {curvature} at the conjugate point"
            )));
        }
        (GeneratingRegime::Interior, l.eval(x) / curvature.sqrt())
    };
    Ok(GeneratingAsymptotics {
        sigma: pair.sigma_value,
        lambda,
        regime,
        maximizer: pair.maximizer_x,
    })
}

fn left_value(f: &PiecewiseFunction, x: f64) -> f64 {
    match f.pieces().iter().find(|p| p.a < x && p.b >= x) {
        Some(p) => p.eval(x),
        None => f.eval(x),
    }
}

/// As [`semiclassical_generating_fn`] for a probability-picture field, using
/// its Hermite interpolants.
pub fn semiclassical_generating(field: &SemiclassicalField, z: f64) -> Result<GeneratingAsymptotics> {
    if field.picture != Picture::Probability {
        return Err(Error::InvalidInput("field must be in the probability picture".into()));
    }
    semiclassical_generating_fn(&field.action_function(), &field.amplitude_function(), z)
}

/// Restriction of `f` to `[0, 1]`, `+inf` elsewhere.
fn clip_unit(f: &PiecewiseFunction) -> Result<PiecewiseFunction> {
    let mut pieces: Vec<Piece> = f
        .pieces()
        .iter()
        .filter(|p| p.b >= 0.0 && p.a <= 1.0)
        .map(|p| Piece {
            a: p.a.max(0.0),
            b: p.b.min(1.0),
            ..p.clone()
        })
        .collect();
    if f.outside().is_finite() {
        let c = f.outside();
        let mut filled = Vec::new();
        let mut reach = 0.0;
        for p in pieces.drain(..) {
            if p.a > reach {
                filled.push(Piece::new(reach, p.a, vec![c]));
            }
            reach = p.b;
            filled.push(p);
        }
        if reach < 1.0 {
            filled.push(Piece::new(reach, 1.0, vec![c]));
        }
        pieces = filled;
    }
    PiecewiseFunction::new(pieces, f64::INFINITY)
}

/// `sum_{k=0}^{n} exp(-n S(k/n)) L(k/n) z^k` as a scaled sum.
pub fn direct_generating_scaled(
    s: &PiecewiseFunction,
    l: &PiecewiseFunction,
    n: u64,
    z: f64,
) -> Result<ScaledSum> {
    if !(z > 0.0) {
        return Err(Error::InvalidInput(format!("z must be positive, got {z}")));
    }
    let f = clip_unit(s)?.add_linear(0.0, -z.ln())?;
    let problem = SeriesProblem::new(f, l.clone(), 1.0);
    eval_series_scaled(&problem, n, SeriesOptions::with_tol(1e-14))
}

pub fn generating_from_distribution(p: &ProbabilityDistribution, z: f64) -> f64 {
    let mut acc = NeumaierSum::new();
    let mut power = 1.0;
    for &v in p.probabilities() {
        acc.add(v * power);
        power *= z;
    }
    acc.value()
}
