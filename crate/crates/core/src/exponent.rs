//! Scale exponents `alpha` in `x_k = k / n^alpha`, kept exact when given as a
//! ratio so that regime thresholds compare without rounding.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floats within this distance of a threshold are treated as equal to it.
pub const THRESHOLD_BAND: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleExponent {
    value: f64,
    ratio: Option<(u64, u64)>,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl ScaleExponent {
    pub fn new(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidInput(format!(
                "scale exponent must be positive, got {value}"
            )));
        }
        Ok(Self { value, ratio: None })
    }

    pub fn rational(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidInput(format!(
                "scale exponent {num}/{den} must be positive"
            )));
        }
        let g = gcd(num, den);
        Ok(Self {
            value: num as f64 / den as f64,
            ratio: Some((num / g, den / g)),
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn ratio(&self) -> Option<(u64, u64)> {
        self.ratio
    }

    /// Ordering of `self` against the threshold `num/den`.
    pub fn cmp_threshold(&self, num: u64, den: u64) -> Ordering {
        match self.ratio {
            Some((p, q)) => (p as u128 * den as u128).cmp(&(num as u128 * q as u128)),
            None => {
                let t = num as f64 / den as f64;
                if (self.value - t).abs() <= THRESHOLD_BAND {
                    Ordering::Equal
                } else {
                    self.value.total_cmp(&t)
                }
            }
        }
    }

    pub fn is_one(&self) -> bool {
        self.cmp_threshold(1, 1) == Ordering::Equal
    }
}

impl From<f64> for ScaleExponent {
    /// Panics on non-positive input; use [`ScaleExponent::new`] to validate.
    fn from(value: f64) -> Self {
        ScaleExponent::new(value).expect("positive scale exponent")
    }
}

impl FromStr for ScaleExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidInput(format!("cannot parse scale exponent {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: u64 = n.trim().parse().map_err(|_| bad())?;
            let d: u64 = d.trim().parse().map_err(|_| bad())?;
            return ScaleExponent::rational(n, d);
        }
        if let Ok(n) = s.parse::<u64>() {
            return ScaleExponent::rational(n, 1);
        }
        ScaleExponent::new(s.parse().map_err(|_| bad())?)
    }
}

impl fmt::Display for ScaleExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ratio {
            Some((p, 1)) => write!(f, "{p}"),
            Some((p, q)) => write!(f, "{p}/{q}"),
            None => write!(f, "{}", self.value),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ratios_exactly() {
        let a: ScaleExponent = "2/6".parse().unwrap();
        assert_eq!(a.ratio(), Some((1, 3)));
        assert_eq!(a.cmp_threshold(1, 3), Ordering::Equal);
        assert_eq!(a.to_string(), "1/3");
        let b: ScaleExponent = "1".parse().unwrap();
        assert!(b.is_one());
    }

    #[test]
    fn float_band_maps_to_threshold() {
        let a = ScaleExponent::new(1.0 / 3.0).unwrap();
        assert_eq!(a.cmp_threshold(1, 3), Ordering::Equal);
        let b = ScaleExponent::new(0.34).unwrap();
        assert_eq!(b.cmp_threshold(1, 3), Ordering::Greater);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!("0".parse::<ScaleExponent>().is_err());
        assert!("-0.5".parse::<ScaleExponent>().is_err());
        assert!("x".parse::<ScaleExponent>().is_err());
    }
}
