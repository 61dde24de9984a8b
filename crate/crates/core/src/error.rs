use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields are defined on different grids")]
    GridMismatch,

    #[error("dispersion matrix is not diagonal; diagonalize the system first")]
    NotDiagonal,

    #[error("blow-up detected; last valid time t = {last_valid_t}")]
    BlowupDetected { last_valid_t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular transform: {0}")]
    SingularTransform(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
