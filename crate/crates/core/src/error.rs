use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DrlError {
    #[error("shape mismatch: expected {expected}, got {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear system is singular or ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("no root: {0}")]
    Infeasible(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for DrlError {
    fn from(e: std::io::Error) -> Self {
        DrlError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DrlError>;

pub(crate) fn invalid(msg: impl Into<String>) -> DrlError {
    DrlError::InvalidArgument(msg.into())
}
