//! JSON run configuration for SIS experiments.

use serde::{Deserialize, Serialize};

use super::{Picture, SemiclassicalField, SisParams};
use crate::error::{Error, Result};
use crate::piecewise::PiecewiseFunction;

fn default_grid_points() -> usize {
    801
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SisRunConfig {
    pub beta: f64,
    pub alpha_r: f64,
    pub n: u64,
    pub t: f64,
    pub tol: f64,
    #[serde(rename = "S0")]
    pub s0: PiecewiseFunction,
    #[serde(rename = "L0")]
    pub l0: PiecewiseFunction,
    pub picture: Picture,
    /// Number of characteristics seeded on the finite range of `S0`.
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    /// Evaluation points for the generating-function comparison.
    #[serde(default)]
    pub z_values: Option<Vec<f64>>,
    /// Population sizes for the conservation ladder.
    #[serde(default)]
    pub n_ladder: Option<Vec<u64>>,
}

impl SisRunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
        c.params()?;
        if !(c.t >= 0.0 && c.t.is_finite()) {
            return Err(Error::InvalidInput("t must be nonnegative".into()));
        }
        if !(c.tol > 0.0 && c.tol < 1.0) {
            return Err(Error::InvalidInput("tol must lie in (0, 1)".into()));
        }
        if c.grid_points < 3 {
            return Err(Error::InvalidInput("grid_points must be at least 3".into()));
        }
        Ok(c)
    }

    pub fn params(&self) -> Result<SisParams> {
        SisParams::new(self.beta, self.alpha_r, self.n)
    }

    /// Seeds a uniform grid over the finite range of `S0`, clipped to
    /// `[0, 1]` in the probability picture.
    pub fn initial_field(&self) -> Result<SemiclassicalField> {
        let bps = self.s0.breakpoints();
        let (mut lo, mut hi) = match (bps.first(), bps.last()) {
            (Some(a), Some(b)) => (*a, *b),
            _ => (0.0, 1.0),
        };
        if self.picture == Picture::Probability {
            lo = lo.max(0.0);
            hi = hi.min(1.0);
        } else if !(lo > 0.0) {
            lo = hi * 1e-3;
        }
        if !(hi > lo) {
            return Err(Error::InvalidInput("S0 has no finite range to seed".into()));
        }
        let m = self.grid_points;
        let grid = (0..m)
            .map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64)
            .collect();
        SemiclassicalField::from_functions(self.picture, grid, &self.s0, &self.l0)
    }
}
