use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("universe size mismatch: {left} vs {right}")]
    UniverseMismatch { left: u64, right: u64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("index {index} out of range (bound {bound})")]
    OutOfRange { index: u64, bound: u64 },

    #[error("cannot sketch an empty set")]
    EmptySet,

    #[error("record {index}")]
    Record {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("{}", path.display())]
    Path {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn with_path(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Path {
            path: path.into(),
            source,
        }
    }

    /// Attach `path` to a bare IO error; other errors pass through.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            Error::Io(source) => Error::with_path(path, source),
            other => other,
        }
    }

    /// True for failures caused by the filesystem rather than by the input values.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) | Error::Path { .. } => true,
            Error::Record { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
