//! Model series with closed forms: the exponential sum, the Gaussian sum over
//! the integers, Jacobi's theta_3, the triangular wave and the oscillatory
//! factor `P`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::compensated::NeumaierSum;
use crate::error::{Error, Result};

/// Nome exponents above this underflow; the theta factor is then exactly 1.
const NOME_UNDERFLOW: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSumParams {
    pub n: u64,
    pub alpha: f64,
    pub gamma: f64,
    pub x0: f64,
}

impl GaussianSumParams {
    pub fn new(n: u64, alpha: f64, gamma: f64, x0: f64) -> Result<Self> {
        if n < 1 || !(alpha > 0.0) || !(gamma > 0.0) || !(x0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "need n >= 1 and alpha, gamma, x0 > 0; got ({n}, {alpha}, {gamma}, {x0})"
            )));
        }
        Ok(Self { n, alpha, gamma, x0 })
    }

    fn n_alpha(&self) -> f64 {
        (self.n as f64).powf(self.alpha)
    }

    /// `gamma * n^(1 - 2 alpha)`, the curvature of the exponent in `k`.
    fn width_coefficient(&self) -> f64 {
        self.gamma * (self.n as f64).powf(1.0 - 2.0 * self.alpha)
    }
}

/// Distance from `x` to the nearest integer.
pub fn triangular_wave(x: f64) -> f64 {
    (x - x.floor()).min(x.ceil() - x)
}

pub fn theta3(z: f64, q: f64) -> Result<f64> {
    if !(q.abs() < 1.0) {
        return Err(Error::NomeOutOfRange(q));
    }
    let mut acc = NeumaierSum::new();
    acc.add(1.0);
    let mut k = 1u64;
    loop {
        let qk = q.abs().powf((k * k) as f64);
        if qk < 1e-16 {
            break;
        }
        let sign = if q < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
        acc.add(2.0 * sign * qk * (2.0 * k as f64 * z).cos());
        k += 1;
    }
    Ok(acc.value())
}

/// Closed form of `n^(1-a) sum_{k>=0} exp(-gamma n^(1-a) k)`.
pub fn exp_sum(n: u64, alpha: f64, gamma: f64) -> f64 {
    let m = (n as f64).powf(1.0 - alpha);
    m / -(-gamma * m).exp_m1()
}

/// `n^(1-a) sum_{k in Z} exp(-gamma n^(1-2a) (k - n^a x0)^2)`, summed outward
/// from the nearest integer until the omitted tail is below `1e-16` of the
/// running sum.
pub fn gaussian_sum_direct(p: &GaussianSumParams) -> f64 {
    let c = p.width_coefficient();
    let centre = p.n_alpha() * p.x0;
    let k0 = centre.round();
    let term = |k: f64| (-c * (k - centre) * (k - centre)).exp();
    let mut acc = NeumaierSum::new();
    acc.add(term(k0));
    for dir in [1.0, -1.0] {
        let mut j = 1.0;
        loop {
            let k = k0 + dir * j;
            let t = term(k);
            acc.add(t);
            // Beyond this term the summand decays at least geometrically with
            // ratio exp(-c (2 d + 1)), d = distance of k from the centre.
            let d = (k - centre).abs();
            let r = (-c * (2.0 * d + 1.0)).exp();
            if d > 0.5 && r < 1.0 {
                let tail = t * r / (1.0 - r);
                if tail < 1e-16 * acc.value() {
                    break;
                }
            }
            j += 1.0;
        }
    }
    (p.n as f64).powf(1.0 - p.alpha) * acc.value()
}

/// Poisson-summed form of the Gaussian sum:
/// `sqrt(pi n / gamma) * theta3(-n^a pi x0, exp(-n^(2a-1) pi^2 / gamma))`.
pub fn gaussian_sum_theta(p: &GaussianSumParams) -> Result<f64> {
    let n = p.n as f64;
    let prefactor = (PI * n / p.gamma).sqrt();
    let exponent = n.powf(2.0 * p.alpha - 1.0) * PI * PI / p.gamma;
    if exponent > NOME_UNDERFLOW {
        return Ok(prefactor);
    }
    Ok(prefactor * theta3(-p.n_alpha() * PI * p.x0, (-exponent).exp())?)
}

pub fn oscillatory_factor_p(p: &GaussianSumParams) -> f64 {
    let c = p.width_coefficient();
    let t = triangular_wave(p.n_alpha() * p.x0);
    (-c * t * t).exp() + (-c * (1.0 - t) * (1.0 - t)).exp()
}
