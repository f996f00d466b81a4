use thiserror::Error;

/// Errors raised by input validation across the crate. Solver outcomes such as
/// infeasibility are reported through status enums, not through this type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("power-splitting ratio {0} outside [0, 1]")]
    BetaOutOfRange(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid conic problem: {0}")]
    InvalidProblem(String),
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
