use thiserror::Error;

/// Errors produced by the weak-supervision pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("no labeling functions")]
    NoLabelingFunctions,

    #[error("operation is defined for exactly two classes, got {0}")]
    BinaryOnly(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no confident samples: every row fell below the confidence threshold")]
    NoConfidentSamples,

    #[error("gold labels contain only one class, need both")]
    SingleClassGold,

    #[error("document `{0}` has no gold label")]
    MissingGold(String),

    #[error("class {class} has only {available} gold-labelled documents, need {needed}")]
    TooFewClassExamples {
        class: usize,
        needed: usize,
        available: usize,
    },

    #[error("embedding table has no vector for class name `{0}`")]
    MissingClassVector(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn parse(path: &std::path::Path, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.display().to_string(),
            line,
            msg: msg.into(),
        }
    }
}
