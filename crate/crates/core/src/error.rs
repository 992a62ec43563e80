use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cannot normalize an all-zero signal")]
    CannotNormalize,

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("format error at byte offset {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error("checkpoint version mismatch: expected `{expected}`, found `{found}`")]
    VersionMismatch { expected: String, found: String },

    #[error("corrupt checkpoint blob: {0}")]
    CorruptBlob(String),

    #[error("inconsistent checkpoint tensor table: {0}")]
    ShapeTable(String),

    #[error("line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("unknown mitigation method `{0}`")]
    UnknownMethod(String),

    #[error("method `proposed` requires a trained model")]
    ModelRequired,

    #[error("no true target falls inside the spectrum")]
    NoScorableTarget,

    #[error("non-finite loss at batch {batch} (step {step})")]
    NonFiniteLoss { batch: usize, step: u64 },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn format(offset: u64, reason: impl Into<String>) -> Self {
        Error::Format {
            offset,
            reason: reason.into(),
        }
    }

    pub fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// True for errors caused by malformed or corrupted input files.
    pub fn is_format_error(&self) -> bool {
        matches!(
            self,
            Error::Format { .. }
                | Error::Csv { .. }
                | Error::VersionMismatch { .. }
                | Error::CorruptBlob(_)
                | Error::ShapeTable(_)
        )
    }
}
