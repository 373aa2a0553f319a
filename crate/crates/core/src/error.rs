use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("utterance {utterance}: syllable {index} is not covered by any token annotation")]
    UncoveredSyllable { utterance: String, index: usize },

    #[error("unknown phoneme symbol {0:?}")]
    UnknownPhoneme(String),

    #[error("no connective threshold: every candidate produced an empty graph")]
    NoConnectiveThreshold,

    #[error("no surviving shape types: every community is smaller than {threshold}")]
    NoSurvivingShapeTypes { threshold: usize },

    #[error("non-finite feature value in column {column}")]
    NonFinite { column: String },

    #[error("category skipped: minority class has {size} instances (< {floor})")]
    MinorityTooSmall { size: usize, floor: usize },

    #[error("{0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from bad input data rather than an internal fault.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
