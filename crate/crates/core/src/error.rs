use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("expected a {expected} field, file holds a {found} field")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected_h}x{expected_w}, got {got_h}x{got_w}")]
    Dimension {
        expected_h: usize,
        expected_w: usize,
        got_h: usize,
        got_w: usize,
    },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("spectrum is not Hermitian (relative deviation {deviation:e})")]
    Symmetry { deviation: f64 },

    #[error("statistics hold no training pairs")]
    EmptyStatistics,

    #[error("solver diverged at bin ({row}, {col}) after {iteration} sweeps")]
    Divergence {
        row: usize,
        col: usize,
        iteration: usize,
    },

    #[error("invalid kernel geometry: {0}")]
    Geometry(String),

    #[error("signal has zero variance")]
    DegenerateSignal,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn format(offset: usize, message: impl Into<String>) -> Self {
        Error::Format {
            offset: offset as u64,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by malformed files or data rather than usage.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Argument(_))
    }
}

pub(crate) fn check_dims(expected: (usize, usize), got: (usize, usize)) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension {
            expected_h: expected.0,
            expected_w: expected.1,
            got_h: got.0,
            got_w: got.1,
        });
    }
    Ok(())
}
