use thiserror::Error;

/// Errors produced by the verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("inversion diverged: no bracket for y = {y} below 2^200")]
    Divergence { y: f64 },

    #[error("monotonicity violation: {what} = {value} at t = {t}")]
    Monotonicity { what: String, t: f64, value: f64 },

    #[error("non-finite value {value} at {context}")]
    NonFinite { context: String, value: f64 },

    #[error("eigen-solver failed to converge for order {0}")]
    EigenSolver(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn non_finite(context: impl Into<String>, value: f64) -> Self {
        Error::NonFinite {
            context: context.into(),
            value,
        }
    }
}
