use std::io;

/// Errors produced anywhere in the detection toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("window larger than series (window {window}, length {length})")]
    WindowTooLarge { window: usize, length: usize },

    #[error("series too short for window size (need at least {needed} samples, got {length})")]
    SeriesTooShort { needed: usize, length: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("no ground truth")]
    NoGroundTruth,

    #[error("non-finite loss {loss} in epoch {epoch}")]
    NonFiniteLoss { epoch: usize, loss: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid model file: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for failures of the numerical optimization rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFiniteLoss { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
