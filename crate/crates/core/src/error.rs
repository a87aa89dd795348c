use thiserror::Error;

use crate::sis::SemiclassicalField;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("series is not summable: {0}")]
    NonSummable(String),

    #[error("every grid point lies where f = +inf")]
    EmptyDomain,

    #[error("integral could not be bounded: {0}")]
    NonIntegrable(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("nome |q| = {0} is not below 1")]
    NomeOutOfRange(f64),

    #[error("degenerate minimum at x = {x0}: {reason}")]
    DegenerateMinimum { x0: f64, reason: String },

    #[error("global minimum is not unique: f({first}) and f({second}) tie")]
    NonUniqueMinimum { first: f64, second: f64 },

    #[error("unsupported minimum at x = {x0}: {reason}")]
    UnsupportedMinimum { x0: f64, reason: String },

    #[error("function is unbounded below")]
    UnboundedBelow,

    #[error("expansion order {0} is not available")]
    OrderUnavailable(usize),

    #[error("derivative is not monotone on the domain")]
    NotMonotone,

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("normalization drifted by {drift:e}")]
    ToleranceExceeded { drift: f64 },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("characteristics cross before t = {requested}; last safe time {safe_time}")]
    CausticFormed {
        safe_time: f64,
        requested: f64,
        field: Box<SemiclassicalField>,
    },

    #[error("integration failed: {0}")]
    IntegrationFailure(String),
}
