use thiserror::Error;

/// Errors surfaced by the numerical core.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: String,
    },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("matrix is not cooperative: negative off-diagonal {value:.3e} at ({row},{col})")]
    NotCooperative { row: usize, col: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver failed: {0}")]
    EigensolverFailure(String),

    #[error("time stepping failed: {0}")]
    IntegrationFailure(String),

    #[error("monotone iteration failed: {0}")]
    IterationFailure(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
