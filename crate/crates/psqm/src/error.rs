use thiserror::Error;

#[derive(Debug, Error)]
pub enum PsqmError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("point outside the grid: {0}")]
    OutOfGrid(String),
    #[error("operator is not hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("deconvolution amplification {amplification:e} exceeds {limit:e}")]
    IllPosed { amplification: f64, limit: f64 },
    #[error("unsupported dimension m={0}")]
    UnsupportedDimension(usize),
    #[error("quadrature budget exceeded: {needed} kernel evaluations > {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PsqmError>;
