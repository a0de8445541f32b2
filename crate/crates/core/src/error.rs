use std::io;

use thiserror::Error;

use crate::rational::Rational;

/// Failure of an exact arithmetic step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("integer overflow in exact arithmetic")]
    Overflow,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("speed list is empty")]
    EmptySpeeds,
    #[error("speed {0} is not positive")]
    NonPositiveSpeed(i64),
    #[error("speed {0} appears more than once")]
    DuplicateSpeed(u64),
    #[error("speed {speed} exceeds the supported bound {limit}")]
    SpeedTooLarge { speed: u64, limit: u64 },
    #[error("offset denominators are too large for exact evaluation (common denominator {0})")]
    OffsetTooLarge(u64),
    #[error("floor {0} must satisfy 0 < floor <= 1/2")]
    InvalidFloor(Rational),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("checkpoint belongs to a different scan (expected config hash {expected}, found {found})")]
    CheckpointMismatch { expected: String, found: String },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True when the failure comes from the fixed integer width rather than
    /// from bad input.
    pub fn is_width_exceeded(&self) -> bool {
        matches!(
            self,
            Error::Arith(ArithError::Overflow) | Error::SpeedTooLarge { .. } | Error::OffsetTooLarge(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
