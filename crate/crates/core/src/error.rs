//! Error type shared across the crate.

use std::io;
use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in this crate.
///
/// Operations that have a well-defined degenerate outcome (for example a
/// normal that cannot be estimated from too few neighbors) do *not* error;
/// they report the degeneracy in their output instead. Errors are reserved
/// for invalid arguments and I/O trouble.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Reading or writing a file failed at the OS level. The message
    /// carries the cause itself, so the variant deliberately exposes no
    /// `source()` link — callers walking a chain would otherwise print the
    /// cause twice. (A field named `source` would become the chain link
    /// implicitly, hence the name `cause`.) The underlying error remains a
    /// public field.
    #[error("{path}: {cause}")]
    Io { path: PathBuf, cause: io::Error },

    /// A cloud or ground-truth file did not match its expected syntax.
    /// `line` is 1-based and counts physical lines of the file.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A per-point attribute name was requested that the cloud does not carry.
    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),

    /// A per-point attribute was supplied with the wrong number of values.
    #[error("attribute {name:?} has {actual} values for a cloud of {expected} points")]
    AttributeLength {
        name: String,
        expected: usize,
        actual: usize,
    },

    /// A search or support radius was not a positive finite number.
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),

    /// A parameter combination violated its documented constraints.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A magnitude threshold outside the meaningful range.
    #[error("threshold must lie in [0, 1], got {0}")]
    InvalidThreshold(f64),

    /// A point index referred past the end of its cloud.
    #[error("point index {index} out of range for a cloud of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    /// A labeled sample class contained no usable points.
    #[error("class {0:?} has no points")]
    EmptyClass(String),

    /// An objective class name that is not present in the computed statistics.
    #[error("unknown class {0:?}")]
    UnknownClass(String),

    /// An operation that needs at least one element received none.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, cause: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            cause,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
