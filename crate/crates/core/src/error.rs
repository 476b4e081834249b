use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere in the allocation pipeline.
///
/// Variants fall into three families that map onto the CLI exit codes:
/// validation (bad arguments or configuration), data (unreadable or
/// inconsistent inputs) and numerical (the math itself is undefined).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("window out of range: {0}")]
    WindowOutOfRange(String),

    #[error(
        "only {surviving} asset(s) survive the complete-case filter at {as_of}; need at least 2"
    )]
    TooFewAssets { as_of: String, surviving: usize },

    #[error("universe mismatch: {0}")]
    UniverseMismatch(String),

    #[error("asset {asset} has zero variance over the look-back window")]
    ZeroVariance { asset: String },

    #[error("covariance matrix is singular or near-singular (reciprocal condition number {rcond:.3e}); apply shrinkage")]
    Singular { rcond: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),
}

/// Coarse error class, used by the CLI to select an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Data,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) => ErrorKind::Validation,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::Data(_)
            | Error::WindowOutOfRange(_)
            | Error::TooFewAssets { .. }
            | Error::UniverseMismatch(_) => ErrorKind::Data,
            Error::ZeroVariance { .. } | Error::Singular { .. } | Error::Numerical(_) => {
                ErrorKind::Numerical
            }
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
