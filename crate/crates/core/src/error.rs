use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("size limit exceeded: {what} has dimension {dim}, cap is {cap}")]
    SizeLimit { what: &'static str, dim: usize, cap: usize },

    #[error("degenerate input: |R[{index}][{index}]| = {value:e} is below the rank threshold")]
    RankDeficient { index: usize, value: f64 },

    #[error("dimension {dim} out of range [{min}, {max}]")]
    DimOutOfRange { dim: usize, min: usize, max: usize },

    #[error("matrix is not unitary: ||U^dag U - 1||_F = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("channel is not trace preserving: ||sum A^dag A - 1||_F = {deviation:e}")]
    NotTracePreserving { deviation: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("integrator unstable: trace drift {drift:e} exceeds {limit:e}; try dt <= {suggested_dt:e}")]
    IntegratorUnstable { drift: f64, limit: f64, suggested_dt: f64 },

    #[error("insufficient signal: {0}")]
    InsufficientSignal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch { expected: expected.to_string(), found: found.to_string() }
    }
}
