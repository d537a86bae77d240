use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A single input record could not be turned into a post.
    #[error("line {line}: field `{field}`: {message}")]
    Record {
        line: usize,
        field: String,
        message: String,
    },

    #[error("line {line}: duplicate post id `{id}`")]
    DuplicatePostId { line: usize, id: String },

    #[error("cannot compute term frequency of an empty document")]
    EmptyDocument,

    #[error("no post has any tokens")]
    NoTokens,

    #[error("empty vocabulary after IDF filter")]
    EmptyVocabulary,

    #[error("no document survives vocabulary encoding")]
    EmptyCorpus,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("inconsistent sampler state: {0}")]
    InconsistentState(String),

    #[error("label set: {0}")]
    Labels(String),

    #[error("model file: {0}")]
    Model(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn record(line: usize, field: &str, message: impl Into<String>) -> Self {
        Error::Record {
            line,
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
