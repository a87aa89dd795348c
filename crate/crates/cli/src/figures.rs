//! Data behind the worked-example figures.
//!
//! All four use `f(x) = 1/16 - x^2 + 2x^3 - x^4` on `[0, 1]` and `g = 1`, with
//! minimum `f(1/2) = 0`, `f''(1/2) = 1`.

use std::f64::consts::PI;

use laplace_sums::asymptotics::{relative_error_report, ReportRow};
use laplace_sums::series::SeriesProblem;
use laplace_sums::{worked_example_f, PiecewiseFunction, ScaleExponent};
use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

const REL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    A,
    B,
    C,
    D,
}

impl std::str::FromStr for Figure {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "1a" => Ok(Figure::A),
            "1b" => Ok(Figure::B),
            "1c" => Ok(Figure::C),
            "1d" => Ok(Figure::D),
            other => Err(CliError::input(format!("unknown figure '{other}', expected 1a, 1b, 1c or 1d"))),
        }
    }
}

impl Figure {
    pub fn id(self) -> &'static str {
        match self {
            Figure::A => "1a",
            Figure::B => "1b",
            Figure::C => "1c",
            Figure::D => "1d",
        }
    }

    pub fn alpha(self) -> ScaleExponent {
        let (num, den) = match self {
            Figure::A => (1, 1),
            Figure::B => (1, 2),
            Figure::C => (2, 5),
            Figure::D => (1, 3),
        };
        ScaleExponent::rational(num, den).expect("positive exponent")
    }

    pub fn header(self) -> &'static [&'static str] {
        match self {
            Figure::A => &["n", "ratio_minus_1"],
            Figure::B => &["n", "scaled_direct", "theta_prediction", "relative_error"],
            Figure::C => &["n", "scaled_direct", "p", "relative_error"],
            Figure::D => &["n", "scaled_direct", "p", "relative_error", "absolute_error"],
        }
    }

    pub fn n_grid(self) -> Vec<u64> {
        match self {
            Figure::A | Figure::B => log_grid(100, 100_000, 40),
            Figure::C | Figure::D => (1000..=100_000).step_by(500).collect(),
        }
    }

    pub fn grid_description(self) -> Value {
        match self {
            Figure::A | Figure::B => json!({"kind": "log", "from": 100, "to": 100000, "points": 40}),
            Figure::C | Figure::D => json!({"kind": "linear", "from": 1000, "to": 100000, "step": 500}),
        }
    }
}

/// `points` log-spaced integers from `lo` to `hi`, rounded and deduplicated.
pub fn log_grid(lo: u64, hi: u64, points: usize) -> Vec<u64> {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut v: Vec<u64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as u64)
        .collect();
    v.dedup();
    v
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum FigureRow {
    A(u64, f64),
    B(u64, f64, f64, f64),
    D(u64, f64, f64, f64, f64),
}

pub fn compute(fig: Figure, n_values: &[u64]) -> Result<Vec<FigureRow>, CliError> {
    let alpha = fig.alpha();
    let problem = SeriesProblem::new(worked_example_f(), PiecewiseFunction::constant(1.0), alpha);
    let rows = relative_error_report(&problem, alpha, n_values, REL_TOL)?;
    Ok(rows.iter().map(|r| row(fig, alpha.value(), r)).collect())
}

fn row(fig: Figure, alpha: f64, r: &ReportRow) -> FigureRow {
    let n = r.n as f64;
    let rel = (r.ratio - 1.0).abs();
    match fig {
        Figure::A => FigureRow::A(r.n, r.ratio - 1.0),
        Figure::B => {
            let norm = (2.0 * PI * n).sqrt();
            FigureRow::B(r.n, r.direct / norm, r.asymptotic / norm, rel)
        }
        Figure::C => {
            let norm = n.powf(1.0 - alpha);
            FigureRow::B(r.n, r.direct / norm, r.asymptotic / norm, rel)
        }
        Figure::D => {
            let norm = n.powf(1.0 - alpha);
            FigureRow::D(r.n, r.direct / norm, r.asymptotic / norm, rel, r.abs_error)
        }
    }
}
