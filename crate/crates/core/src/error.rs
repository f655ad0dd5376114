use thiserror::Error;

/// Errors produced by the generator, the measurements and the runners.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside [0, 1]")]
    Domain { name: &'static str, value: f64 },

    #[error("invalid graphon: {0}")]
    InvalidGraphon(String),

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("graph sample has no latent coordinates")]
    MissingLatents,

    #[error(
        "dense eigendecomposition refused for n = {n} (cap {cap}); use the trace route instead"
    )]
    EigenCapExceeded { n: usize, cap: usize },

    #[error("target heterophily {target} is unreachable: base limit is zero")]
    UnreachableTarget { target: f64 },

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
