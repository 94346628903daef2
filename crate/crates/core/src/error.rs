use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty slice: {0}")]
    EmptySlice(String),

    #[error("unknown slice: {0}")]
    UnknownSlice(String),

    #[error("word {word:?} is not in the vocabulary of slice {slice}")]
    UnknownWord { slice: String, word: String },

    #[error("unknown section label: {0}")]
    UnknownSection(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical divergence at epoch {epoch}, batch {batch}")]
    NumericalDivergence { epoch: usize, batch: usize },

    #[error("numerical divergence: non-finite objective")]
    NonFinite,

    #[error("item sets of the two partitions differ")]
    ItemSetMismatch,

    #[error("empty test")]
    EmptyTest,

    #[error("zero vector")]
    ZeroVector,

    #[error("empty shared vocabulary between {0} and {1}")]
    EmptySharedVocab(String, String),

    #[error("not a model file (bad magic)")]
    BadMagic,

    #[error("unsupported model format version {found} (this build reads up to {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("truncated model file")]
    Truncated,

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptySlice(_) => "empty_slice",
            Error::UnknownSlice(_) => "unknown_slice",
            Error::UnknownWord { .. } => "unknown_word",
            Error::UnknownSection(_) => "unknown_section",
            Error::InvalidConfig(_) => "invalid_config",
            Error::InvalidInput(_) => "invalid_input",
            Error::NumericalDivergence { .. } | Error::NonFinite => "numerical_divergence",
            Error::ItemSetMismatch => "item_set_mismatch",
            Error::EmptyTest => "empty_test",
            Error::ZeroVector => "zero_vector",
            Error::EmptySharedVocab(..) => "empty_shared_vocab",
            Error::BadMagic => "bad_magic",
            Error::UnsupportedVersion { .. } => "version_mismatch",
            Error::Checksum { .. } => "checksum",
            Error::Truncated => "truncated",
            Error::Format { .. } => "format",
            Error::File { .. } | Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            what,
            detail: detail.into(),
        }
    }
}
