use std::io;

use thiserror::Error;

/// Errors produced by the denoising library.
#[derive(Debug, Error)]
pub enum SmdsError {
    #[error("invalid mode index {0} (expected 1, 2 or 3)")]
    InvalidMode(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("corrupt file: {0}")]
    Corrupt(String),

    #[error("inconsistent shapes: {0}")]
    ShapeInconsistent(String),

    #[error("unsupported version: {0}")]
    Version(String),

    #[error("stale cache: parameters changed since the forward pass")]
    StaleCache,

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SmdsError {
    /// Short machine-parseable category used by the command line front end.
    pub fn category(&self) -> &'static str {
        match self {
            SmdsError::InvalidMode(_)
            | SmdsError::DimensionMismatch(_)
            | SmdsError::InvalidArgument(_)
            | SmdsError::Config(_) => "config",
            SmdsError::NonFinite(_) | SmdsError::StaleCache => "numeric",
            SmdsError::Format(_)
            | SmdsError::Corrupt(_)
            | SmdsError::ShapeInconsistent(_)
            | SmdsError::Version(_) => "format",
            SmdsError::Io(_) | SmdsError::Json(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, SmdsError>;

pub(crate) fn mismatch(msg: impl Into<String>) -> SmdsError {
    SmdsError::DimensionMismatch(msg.into())
}
