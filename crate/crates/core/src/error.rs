use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cut: {0}")]
    CutShape(String),

    #[error("state is not normalized (norm {norm:.3e})")]
    Normalization { norm: f64 },

    #[error("invalid norm specification: {0}")]
    InvalidNorm(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("projected direction vanished (norm {norm:.3e}); restart advised")]
    DegenerateDirection { norm: f64 },

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("linear algebra backend failed: {0}")]
    Backend(String),

    #[error("inconsistent result: {0}")]
    Inconsistent(String),

    #[error("all {0} restarts degenerated")]
    AllRestartsFailed(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
