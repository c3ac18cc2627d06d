//! Error type shared by every pipeline stage.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by preprocessing, featurization, model fitting, metric
/// computation, and artifact serialization.
#[derive(Debug)]
pub enum Error {
    /// I/O failure while reading or writing an artifact.
    Io { path: String, source: std::io::Error },
    /// A data file failed to parse; `line` is 1-based.
    Parse { path: String, line: usize, msg: String },
    /// A precondition or invariant was violated.
    Invalid(String),
    /// Feature-count mismatch between a model and its input.
    DimensionMismatch { expected: usize, got: usize },
    /// Tweets missing from a featurizer's coverage.
    MissingTweetIds { featurizer: String, ids: Vec<String> },
    /// A metric has no defined value for the given input.
    UndefinedMetric { metric: String, reason: String },
    /// A serialized artifact could not be decoded.
    CorruptPayload(String),
    /// A serialized artifact declares an unsupported format version.
    VersionMismatch { found: u32, supported: u32 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io { path, source } => write!(f, "{path}: {source}"),
            Error::Parse { path, line, msg } => write!(f, "{path}:{line}: {msg}"),
            Error::Invalid(msg) => write!(f, "{msg}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected} features, got {got}")
            }
            Error::MissingTweetIds { featurizer, ids } => {
                write!(f, "featurizer '{featurizer}' has no rows for tweet ids: {}", ids.join(", "))
            }
            Error::UndefinedMetric { metric, reason } => {
                write!(f, "{metric} is undefined: {reason}")
            }
            Error::CorruptPayload(msg) => write!(f, "corrupt payload: {msg}"),
            Error::VersionMismatch { found, supported } => {
                write!(f, "unsupported format version {found} (supported: {supported})")
            }
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

pub(crate) fn io_err(path: &std::path::Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}
