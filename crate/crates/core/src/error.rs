use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("metric is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    DegenerateMetric { min_eigenvalue: f64 },

    #[error("matrix is not unimodular (det = {0})")]
    NonUnimodular(i64),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("group closure exceeded cap of {0} elements; not finite?")]
    ClosureCapExceeded(usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}
