//! Laplace-type asymptotics of sharply peaked series and their application to
//! the semiclassical analysis of the SIS epidemic model.
//!
//! The series `I(n, a) = n^(1-a) sum_k exp(-n f(k/n^a)) g(k/n^a)` is evaluated
//! exactly with error bounds ([`series`]), compared with model sums and theta
//! functions ([`standard_sums`]) and with regime-dependent asymptotic formulas
//! ([`asymptotics`]). The [`sis`] module transports WKB actions along
//! characteristics and checks them against the exact master equation, using
//! the restricted Legendre–Fenchel transform of [`legendre`] to pass to the
//! generating-function picture.

pub mod asymptotics;
pub mod compensated;
pub mod error;
pub mod exponent;
pub mod legendre;
pub mod ode;
pub mod piecewise;
pub mod poly;
pub mod quadrature;
pub mod series;
pub mod sis;
pub mod standard_sums;

pub use error::{Error, Result};
pub use exponent::ScaleExponent;
pub use piecewise::{Piece, PiecewiseFunction};
pub use series::{SeriesProblem, SumResult};

/// The worked example `f(x) = 1/16 - x^2 + 2x^3 - x^4` on `[0, 1]`, `+inf`
/// elsewhere: interior minimum at `1/2` with `f = 0`, `f'' = 1`.
pub fn worked_example_f() -> PiecewiseFunction {
    PiecewiseFunction::polynomial_on(0.0, 1.0, vec![1.0 / 16.0, 0.0, -1.0, 2.0, -1.0], f64::INFINITY)
        .expect("valid piece")
}
