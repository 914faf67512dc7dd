use std::path::PathBuf;

/// Errors produced by corpus ingestion, training, graph building and statistics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
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

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty vocabulary: no word occurs more than {min_count} times")]
    EmptyVocabulary { min_count: u64 },

    #[error("no in-vocabulary tokens in corpus")]
    NoTrainableTokens,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("undefined similarity: zero vector")]
    UndefinedSimilarity,

    #[error("zero vector for word {word:?}")]
    ZeroVector { word: String },

    #[error("no vectors")]
    NoVectors,

    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("degenerate fit; AIC undefined")]
    DegenerateFit,

    #[error("assortativity undefined: endpoint degrees have zero variance")]
    AssortativityUndefined,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
