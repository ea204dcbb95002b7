use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("insufficient samples: need {needed}, have {have}")]
    InsufficientSamples { needed: usize, have: usize },

    #[error("unsupported resampling ratio {from_hz} Hz -> {to_hz} Hz")]
    UnsupportedRatio { from_hz: f64, to_hz: f64 },

    #[error("sample rate mismatch: expected {expected} Hz, got {got} Hz")]
    RateMismatch { expected: f64, got: f64 },

    #[error("sub-band {index} out of range (1..={max})")]
    SubbandOutOfRange { index: usize, max: usize },

    #[error("frequency {freq_hz} Hz lies outside sub-band {index}")]
    OutsideSubband { freq_hz: f64, index: usize },

    #[error("fundamental not found near {expected_hz} Hz")]
    FundamentalNotFound { expected_hz: f64 },

    #[error("equalizer diverged (tap norm {tap_norm:.3e})")]
    Diverged { tap_norm: f64 },

    #[error("equalizer did not converge: MSE {after:.3e} after training vs {before:.3e} before")]
    NotConverged { before: f64, after: f64 },

    #[error("length mismatch: {what}")]
    LengthMismatch { what: String },

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config rule `{rule}` violated: {message}")]
    Validation { rule: &'static str, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
