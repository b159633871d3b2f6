//! Error type shared by all library modules.

use std::path::PathBuf;

/// Library result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by configuration, generation, and experiment code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scenario configuration violates an invariant or names an unknown field.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An operation argument is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A slot, pilot, or user index exceeds the frame dimensions.
    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    /// File I/O failure, annotated with the offending path.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Serialization or deserialization failure.
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
