use thiserror::Error;

use crate::complex::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid simplex: {0}")]
    InvalidSimplex(String),

    #[error("filtration value {0} is not finite")]
    NonFinite(f64),

    #[error("invalid complex: {0}")]
    Validation(ValidationReport),

    #[error("arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("too few points: need at least {needed}, got {got}")]
    TooSmall { needed: usize, got: usize },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("truncation value {value} is below the maximum filtration value {max}")]
    InvalidTruncation { value: f64, max: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("a zero Lipschitz target requires an unbounded bandwidth")]
    UnboundedBandwidth,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
