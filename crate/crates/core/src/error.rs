use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid direction {direction} for a degree-{degree} hypercube")]
    InvalidDirection { direction: usize, degree: usize },

    #[error("vertex {vertex} out of range for a degree-{degree} hypercube")]
    VertexOutOfRange { vertex: u64, degree: usize },

    #[error("sampling failed: could not place {k} mutually non-adjacent vertices on Q_{n} within {attempts} attempts")]
    SamplingFailed { n: usize, k: usize, attempts: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dense operator of dimension {dim} exceeds the cap of {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("fit did not converge after {iterations} iterations")]
    FitNotConverged {
        iterations: usize,
        best: Box<crate::fitting::FitResult>,
    },

    #[error("unknown weight scheme `{0}`")]
    UnknownScheme(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
