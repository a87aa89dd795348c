//! SIS epidemic semiclassics: the exact master equation, the Hamiltonians of
//! the probability and generating pictures, characteristics transport of
//! `(S, L)` and `(Sigma, Lambda)`, and the diagnostics tying them together.
//!
//! Sign convention: with the ansatz `p_k ~ exp(-n S(k/n)) L(k/n)` the
//! Hamilton–Jacobi equation is `S_t + H(x, S_x) = 0` with
//! `H(x, q) = beta x (1 - x)(e^q - 1) + alpha_r x (e^-q - 1)`. The generating
//! function `Gamma ~ exp(n Sigma(z)) Lambda(z)` obeys `Sigma_t + Theta(z, Sigma_z) = 0`.
//! Under these conventions `Theta(z, q) = -H(z q, ln z)` holds identically.

mod characteristics;
mod config;
mod diagnostics;
mod generating;
mod master;

pub use characteristics::{
    evolve_characteristics, integrate_characteristic, Characteristic, CharacteristicState,
    SemiclassicalField,
};
pub use config::SisRunConfig;
pub use diagnostics::{total_probability_drift, wkb_vs_master, WkbReport};
pub use generating::{
    direct_generating_scaled, generating_from_distribution, semiclassical_generating,
    semiclassical_generating_fn, GeneratingAsymptotics, GeneratingRegime,
};
pub use master::{evolve_master, generator_apply, ProbabilityDistribution};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SisParams {
    pub infection_rate: f64,
    pub recovery_rate: f64,
    pub population: u64,
}

impl SisParams {
    pub fn new(infection_rate: f64, recovery_rate: f64, population: u64) -> Result<Self> {
        if !(infection_rate > 0.0 && infection_rate.is_finite())
            || !(recovery_rate > 0.0 && recovery_rate.is_finite())
        {
            return Err(Error::InvalidInput("SIS rates must be positive".into()));
        }
        if population < 2 {
            return Err(Error::InvalidInput("population must be at least 2".into()));
        }
        Ok(Self {
            infection_rate,
            recovery_rate,
            population,
        })
    }

    fn rates(&self) -> (f64, f64) {
        (self.infection_rate, self.recovery_rate)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    Probability,
    Generating,
}

pub fn hamiltonian_h(x: f64, q: f64, params: &SisParams) -> f64 {
    let (b, a) = params.rates();
    b * x * (1.0 - x) * q.exp_m1() + a * x * (-q).exp_m1()
}

pub fn hamiltonian_theta(z: f64, q: f64, params: &SisParams) -> f64 {
    let (b, a) = params.rates();
    -(b * z - a) * (z - 1.0) * q + b * z * z * (z - 1.0) * q * q
}

/// Zero-energy momentum of the endemic branch, `ln(alpha_r / (beta (1 - x)))`.
pub fn stationary_momentum_x(x: f64, params: &SisParams) -> Result<f64> {
    if !(x < 1.0) {
        return Err(Error::DomainError(format!("x = {x} must be below 1")));
    }
    let (b, a) = params.rates();
    Ok((a / (b * (1.0 - x))).ln())
}

/// Zero-energy momentum in the generating picture: the trivial branch below
/// `z = alpha_r / beta`, the non-trivial one above.
pub fn stationary_momentum_z(z: f64, params: &SisParams) -> f64 {
    let (b, a) = params.rates();
    if z < a / b {
        0.0
    } else {
        (b * z - a) / (b * z * z)
    }
}

/// `Theta(z, q) + H(z q, ln z)`, zero under this module's sign convention.
pub fn momentum_map_residual(z: f64, q: f64, params: &SisParams) -> f64 {
    hamiltonian_theta(z, q, params) + hamiltonian_h(z * q, z.ln(), params)
}

/// Partial derivatives of a picture's Hamiltonian.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Partials {
    pub value: f64,
    pub q: f64,
    pub r: f64,
    pub qq: f64,
    pub qr: f64,
    pub rr: f64,
}

pub(crate) fn partials(picture: Picture, r: f64, q: f64, params: &SisParams) -> Partials {
    let (b, a) = params.rates();
    match picture {
        Picture::Probability => {
            let (ep, em) = (q.exp(), (-q).exp());
            let u = r * (1.0 - r);
            let du = 1.0 - 2.0 * r;
            Partials {
                value: b * u * (ep - 1.0) + a * r * (em - 1.0),
                q: b * u * ep - a * r * em,
                r: b * du * (ep - 1.0) + a * (em - 1.0),
                qq: b * u * ep + a * r * em,
                qr: b * du * ep - a * em,
                rr: -2.0 * b * (ep - 1.0),
            }
        }
        Picture::Generating => {
            let z = r;
            let lin = (b * z - a) * (z - 1.0);
            let dlin = b * (z - 1.0) + (b * z - a);
            let cub = b * z * z * (z - 1.0);
            let dcub = b * (3.0 * z * z - 2.0 * z);
            Partials {
                value: -lin * q + cub * q * q,
                q: -lin + 2.0 * cub * q,
                r: -dlin * q + dcub * q * q,
                qq: 2.0 * cub,
                qr: -dlin + 2.0 * dcub * q,
                rr: -2.0 * b * q + b * (6.0 * z - 2.0) * q * q,
            }
        }
    }
}

/// Rate of change of `ln |amplitude|` along a characteristic with curvature
/// `w = d^2 action / dr^2`.
///
/// Probability picture: `L_t + H_q L_x + (H_qq S_xx / 2 + H_qx) L = 0`.
/// Generating picture: `Lambda_t + Theta_q Lambda_z
/// + (Theta_qq Sigma_zz / 2 + beta (z^2 - z) Sigma_z) Lambda = 0`.
pub(crate) fn log_amplitude_rate(picture: Picture, r: f64, q: f64, w: f64, d: &Partials, params: &SisParams) -> f64 {
    match picture {
        Picture::Probability => -(0.5 * d.qq * w + d.qr),
        Picture::Generating => -(0.5 * d.qq * w + params.infection_rate * (r * r - r) * q),
    }
}
