use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no n-gram survived dictionary filtering")]
    EmptyVocabulary,

    #[error("missing directory {}", .0.display())]
    MissingDirectory(PathBuf),

    #[error("cannot read {}: {source}", path.display())]
    UnreadableFile {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("unknown word {word:?} at position {position}")]
    UnknownWord { word: String, position: usize },

    #[error("corpus is empty after min_count filtering")]
    EmptyCorpus,

    #[error("{points} points cannot be split into {k} clusters")]
    TooFewPoints { points: usize, k: usize },

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },

    #[error("rank {requested} exceeds the smallest matrix dimension {max}")]
    RankRequestTooLarge { requested: usize, max: usize },

    #[error("cannot split {documents} documents into {folds} stratified folds")]
    TooFewDocuments { documents: usize, folds: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid {what}: {message}")]
    Format { what: &'static str, message: String },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Wraps the error with the name of the pipeline stage that raised it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Stage name when the error was raised inside the pipeline.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }

    /// The underlying error with any stage annotation removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
