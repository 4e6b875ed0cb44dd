use thiserror::Error;

use crate::poly::Shape;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoyalError {
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: Shape, right: Shape },

    #[error("variable {0} is not active in shape {1}")]
    InactiveVariable(String, Shape),

    #[error("missing values for the {0} block")]
    MissingBlock(&'static str),

    #[error("shift component {index} has degree {degree}; translations must be affine")]
    NonlinearShift { index: usize, degree: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two independent computations of the same object disagreed, or a
    /// quantity that must vanish identically did not.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for MoyalError {
    fn from(e: std::io::Error) -> Self {
        MoyalError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, MoyalError>;
