use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty data: {0}")]
    EmptyData(String),

    #[error("record {index} has no high-fidelity target")]
    MissingTarget { index: usize },

    #[error("parameter {theta:?} lies outside the domain")]
    OutOfDomain { theta: Vec<f64> },

    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    TrainingDiverged { epoch: usize },

    #[error("model evaluation failed at theta = {theta:?}: {source}")]
    Evaluation {
        theta: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Coarse classification used for process exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Numerical,
    Io,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidSpec(_)
            | Error::InvalidConfig(_)
            | Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::EmptyData(_)
            | Error::MissingTarget { .. }
            | Error::OutOfDomain { .. }
            | Error::Unsupported(_) => ErrorCategory::Usage,
            Error::TrainingDiverged { .. } => ErrorCategory::Numerical,
            Error::Evaluation { source, .. } => source.category(),
            Error::Parse { .. } | Error::Io(_) => ErrorCategory::Io,
        }
    }

    pub(crate) fn parse(context: impl fmt::Display, message: impl fmt::Display) -> Self {
        Error::Parse {
            context: context.to_string(),
            message: message.to_string(),
        }
    }

    pub(crate) fn config(message: impl fmt::Display) -> Self {
        Error::InvalidConfig(message.to_string())
    }

    pub(crate) fn arg(message: impl fmt::Display) -> Self {
        Error::InvalidArgument(message.to_string())
    }
}
