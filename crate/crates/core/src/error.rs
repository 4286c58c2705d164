use thiserror::Error;

/// Errors produced by the numerical routines and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("total weight is zero")]
    ZeroWeight,

    #[error("mean direction is undefined: resultant vector vanishes")]
    UndefinedMean,

    #[error("concentration is unbounded: {0}")]
    Unbounded(String),

    #[error("root bracket [{lower}, {upper}] does not enclose the solution for r = {r}")]
    BracketViolation { lower: f64, upper: f64, r: f64 },

    #[error("point {index} has zero density under every component")]
    ZeroDensity { index: usize },

    #[error("rejection sampler exceeded {0} proposals for a single draw")]
    RejectionCap(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
