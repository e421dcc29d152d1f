use std::path::PathBuf;

use crate::device::MemristorState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("geometry mismatch: expected {expected_rows}x{expected_cols}, found {found_rows}x{found_cols}")]
    GeometryMismatch {
        expected_rows: usize,
        expected_cols: usize,
        found_rows: usize,
        found_cols: usize,
    },

    #[error("sequence of {len} frames is too short for a delay of {delay}")]
    SequenceTooShort { len: usize, delay: usize },

    #[error("device {index} is programmed to {found:?}, expected {expected:?}")]
    WrongDeviceState {
        index: usize,
        expected: MemristorState,
        found: MemristorState,
    },

    #[error("analog row memory read before any write")]
    MemoryNotWritten,

    #[error("object leaves the {rows}x{cols} frame at frame {frame}")]
    SceneOutOfBounds { rows: usize, cols: usize, frame: usize },

    #[error("{}: malformed PGM at byte {offset}: {message}", path.display())]
    MalformedPgm {
        path: PathBuf,
        offset: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
