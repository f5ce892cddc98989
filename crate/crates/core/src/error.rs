use thiserror::Error;

use crate::matexp::LinalgError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("observable not applicable: {0}")]
    InvalidObservable(String),

    #[error("numeric drift: {what} residual {residual:e} exceeds {limit:e}")]
    NumericDrift { what: String, residual: f64, limit: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("integrator step failure: {0}")]
    Integrator(String),
}
