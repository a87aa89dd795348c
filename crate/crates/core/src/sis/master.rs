//! Exact SIS master equation, solved by uniformization.
//!
//! With `Lambda >= max_k` exit rate, `P = I + Q / Lambda` is a nonnegative
//! matrix and `exp(Q t) p = sum_j Pois(j; Lambda t) P^j p`. Every term is
//! nonnegative, so even tiny `p_k` come out with small relative error.

use serde::{Deserialize, Serialize};

use super::SisParams;
use crate::compensated::NeumaierSum;
use crate::error::{Error, Result};

/// Largest Poisson mean per uniformization slice.
const SLICE_MEAN: f64 = 40.0;
const NORMALIZATION_TOL: f64 = 1e-9;
const NEGATIVITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityDistribution {
    p: Vec<f64>,
}

impl ProbabilityDistribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 3 {
            return Err(Error::InvalidDistribution("need at least three states".into()));
        }
        if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < -NEGATIVITY_TOL) {
            return Err(Error::InvalidDistribution(format!("invalid entry {v}")));
        }
        let total: f64 = p.iter().copied().collect::<NeumaierSum>().value();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(Self {
            p: p.into_iter().map(|v| v.max(0.0)).collect(),
        })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidDistribution("weights must be finite and nonnegative".into()));
        }
        let total: f64 = w.iter().copied().collect::<NeumaierSum>().value();
        if !(total > 0.0) {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(w.into_iter().map(|v| v / total).collect())
    }

    pub fn delta(population: u64, k: usize) -> Result<Self> {
        let mut p = vec![0.0; population as usize + 1];
        *p.get_mut(k)
            .ok_or_else(|| Error::InvalidDistribution(format!("state {k} out of range")))? = 1.0;
        Self::new(p)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn population(&self) -> u64 {
        (self.p.len() - 1) as u64
    }

    pub fn mean_fraction(&self) -> f64 {
        let n = self.population() as f64;
        self.p
            .iter()
            .enumerate()
            .map(|(k, v)| k as f64 * v)
            .collect::<NeumaierSum>()
            .value()
            / n
    }
}

fn rates(params: &SisParams, n: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let up = (0..=n)
        .map(|k| params.infection_rate / nf * k as f64 * (nf - k as f64))
        .collect();
    let down = (0..=n).map(|k| params.recovery_rate * k as f64).collect();
    (up, down)
}

/// `dp/dt` under the birth–death generator: infection `k -> k+1` at rate
/// `(beta/n) k (n - k)`, recovery `k -> k-1` at rate `alpha_r k`.
pub fn generator_apply(p: &[f64], params: &SisParams) -> Vec<f64> {
    let n = p.len() - 1;
    let (up, down) = rates(params, n);
    (0..=n)
        .map(|k| {
            let gain_up = if k > 0 { up[k - 1] * p[k - 1] } else { 0.0 };
            let gain_down = if k < n { down[k + 1] * p[k + 1] } else { 0.0 };
            gain_up + gain_down - (up[k] + down[k]) * p[k]
        })
        .collect()
}

pub fn evolve_master(
    p0: &ProbabilityDistribution,
    t: f64,
    params: &SisParams,
    tol: f64,
) -> Result<ProbabilityDistribution> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("time must be nonnegative, got {t}")));
    }
    if p0.population() != params.population {
        return Err(Error::InvalidDistribution(format!(
            "distribution has {} states, population is {}",
            p0.p.len(),
            params.population
        )));
    }
    if t == 0.0 {
        return Ok(p0.clone());
    }
    let n = p0.p.len() - 1;
    let (up, down) = rates(params, n);
    let exit: Vec<f64> = up.iter().zip(&down).map(|(u, d)| u + d).collect();
    let big = exit.iter().copied().fold(0.0, f64::max) * 1.0001;
    if big == 0.0 {
        return Ok(p0.clone());
    }
    let slices = (big * t / SLICE_MEAN).ceil().max(1.0) as usize;
    let mean = big * t / slices as f64;
    let slice_tol = (tol / slices as f64).max(1e-17);

    let step = |v: &[f64]| -> Vec<f64> {
        (0..=n)
            .map(|k| {
                let gain_up = if k > 0 { up[k - 1] * v[k - 1] } else { 0.0 };
                let gain_down = if k < n { down[k + 1] * v[k + 1] } else { 0.0 };
                v[k] * (1.0 - exit[k] / big) + (gain_up + gain_down) / big
            })
            .collect()
    };

    let mut p = p0.p.clone();
    for _ in 0..slices {
        let mut weight = (-mean).exp();
        let mut v = p.clone();
        let mut acc: Vec<NeumaierSum> = v.iter().map(|&x| {
            let mut s = NeumaierSum::new();
            s.add(weight * x);
            s
        }).collect();
        let mut j = 0usize;
        loop {
            j += 1;
            v = step(&v);
            weight *= mean / j as f64;
            for (a, x) in acc.iter_mut().zip(&v) {
                a.add(weight * x);
            }
            let ratio = mean / (j + 1) as f64;
            if ratio < 1.0 && weight * ratio / (1.0 - ratio) <= slice_tol {
                break;
            }
            if j > 100_000 {
                return Err(Error::IntegrationFailure("Poisson series did not converge".into()));
            }
        }
        p = acc.iter().map(|a| a.value()).collect();
    }
    let total: f64 = p.iter().copied().collect::<NeumaierSum>().value();
    let drift = (total - 1.0).abs();
    if drift > NORMALIZATION_TOL {
        return Err(Error::ToleranceExceeded { drift });
    }
    let p = p.into_iter().map(|v| v.max(0.0) / total).collect();
    Ok(ProbabilityDistribution { p })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u64) -> SisParams {
        SisParams::new(2.0, 1.0, n).unwrap()
    }

    #[test]
    fn generator_columns_sum_to_zero() {
        let p: Vec<f64> = (0..=50).map(|k| ((k * 7919) % 13) as f64 + 0.5).collect();
        let d = generator_apply(&p, &params(50));
        let s: f64 = d.iter().sum();
        assert!(s.abs() < 1e-10);
    }

    #[test]
    fn absorbing_state_is_fixed() {
        let p0 = ProbabilityDistribution::delta(100, 0).unwrap();
        let p = evolve_master(&p0, 5.0, &params(100), 1e-12).unwrap();
        assert_eq!(p.probabilities(), p0.probabilities());
    }

    #[test]
    fn matches_matrix_exponential_for_small_chain() {
        // Oracle: tiny explicit Euler steps of the generator.
        let pr = params(6);
        let p0 = ProbabilityDistribution::delta(6, 3).unwrap();
        let t = 0.7;
        let steps = 700_000;
        let dt = t / steps as f64;
        let mut v = p0.probabilities().to_vec();
        for _ in 0..steps {
            let d = generator_apply(&v, &pr);
            for (a, b) in v.iter_mut().zip(d) {
                *a += dt * b;
            }
        }
        let p = evolve_master(&p0, t, &pr, 1e-13).unwrap();
        for (a, b) in p.probabilities().iter().zip(&v) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(ProbabilityDistribution::new(vec![0.5, 0.5, -1e-13]).is_ok());
        assert!(ProbabilityDistribution::new(vec![0.5, 0.6, -0.2]).is_err());
        assert!(ProbabilityDistribution::new(vec![0.5, 0.2, 0.2]).is_err());
    }
}
