use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("total mass mismatch: {0} vs {1}")]
    MassMismatch(f64, f64),

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Projection or bisection budget exhausted; carries the best bracket.
    #[error("no convergence within budget; best bracket [{lower}, {upper}]")]
    NotConverged { lower: f64, upper: f64 },

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("partition is not regular: {0}")]
    Regularity(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
