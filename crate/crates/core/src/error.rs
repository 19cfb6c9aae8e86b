use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty label after canonicalization")]
    EmptyLabel,

    #[error("invalid label space: {0}")]
    InvalidLabelSpace(String),

    #[error("label spaces incompatible: only {shared} shared label(s)")]
    IncompatibleLabelSpaces { shared: usize },

    #[error("label `{0}` is not in the label space")]
    UnknownLabel(String),

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("record `{id}`: {message}")]
    InvalidRecord { id: String, message: String },

    #[error("auxiliary output absent for sample `{0}`")]
    MissingAuxRecord(String),

    #[error("no probability mass on aligned labels")]
    NoAlignedMass,

    #[error("degenerate vector: zero norm")]
    DegenerateVector,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("empty candidate pool")]
    EmptyPool,

    #[error("{name} out of range: {message}")]
    OutOfRange { name: &'static str, message: String },

    #[error("ground-truth weight non-positive: {0}")]
    NonPositiveGroundTruth(f64),

    #[error("unknown template `{0}`")]
    UnknownTemplate(String),

    #[error("template error: {0}")]
    Template(String),

    #[error("length mismatch: {preds} predictions vs {golds} golds")]
    LengthMismatch { preds: usize, golds: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn out_of_range(name: &'static str, message: impl Into<String>) -> Self {
        Error::OutOfRange {
            name,
            message: message.into(),
        }
    }
}
