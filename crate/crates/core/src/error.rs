use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A line of CoNLL-U input could not be read as a token.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A sentence is syntactically readable but does not form a valid tree.
    #[error("sentence {sentence}: {message}")]
    Structure { sentence: String, message: String },

    /// A line of a newline-delimited record file is malformed.
    #[error("{source_name}, line {line}: {message}")]
    Record {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("gold annotations reference documents missing from the corpus: {}", .0.join(", "))]
    DocumentMismatch(Vec<String>),

    #[error("{0}")]
    Invalid(String),

    #[error("no such document: {0}")]
    NotFound(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn record(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Record {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }
}
