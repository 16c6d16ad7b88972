use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("capacity exceeded: {what} needs {requested}, cap is {cap}")]
    Capacity {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("affine map is singular")]
    SingularMap,

    #[error("iteration failed to converge: {0}")]
    Convergence(String),

    #[error("need at least {required} usable degrees, have {found}")]
    InsufficientDegrees { found: usize, required: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("premise check failed: {0}")]
    Premise(String),
}
