//! Crate-wide error type.

use std::fmt;
use std::io;
use std::path::PathBuf;

/// Errors from image I/O, container construction, and parameter validation.
#[derive(Debug)]
pub enum Error {
    /// The file could not be read or written.
    Io { path: PathBuf, source: io::Error },
    /// The file exists but its contents could not be decoded as an image.
    Decode { path: PathBuf, reason: String },
    /// The file format or pixel layout is outside what this crate handles.
    UnsupportedFormat { path: PathBuf, detail: String },
    /// Image dimensions must be positive.
    EmptyImage,
    /// Two rasters that must share a shape do not.
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    /// A buffer's length does not match the stated dimensions.
    BufferLength { expected: usize, actual: usize },
    /// A sample was NaN or infinite.
    NonFinite(&'static str),
    /// A parameter violated its documented range.
    InvalidParam(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io { path, source } => write!(f, "{}: {}", path.display(), source),
            Error::Decode { path, reason } => {
                write!(f, "unreadable file {}: {}", path.display(), reason)
            }
            Error::UnsupportedFormat { path, detail } => {
                write!(f, "unsupported format {}: {}", path.display(), detail)
            }
            Error::EmptyImage => write!(f, "image dimensions must be positive"),
            Error::DimensionMismatch { expected, actual } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, actual.0, actual.1
            ),
            Error::BufferLength { expected, actual } => write!(
                f,
                "buffer holds {actual} samples but the dimensions need {expected}"
            ),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::InvalidParam(msg) => write!(f, "{msg}"),
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
