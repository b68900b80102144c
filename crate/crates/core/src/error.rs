use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A line-oriented input (JSON Lines, TSV) had a bad record. Lines are 1-based.
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },

    /// Tree-JSON did not match the schema; `path` locates the node, e.g. `root.children[1].node`.
    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("invalid tree at {path}: {message}")]
    InvalidTree { path: String, message: String },

    #[error("{0}")]
    InvalidInput(String),

    #[error("coverage is undefined: the evaluated pair set is empty")]
    UndefinedCoverage,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn line(line: usize, message: impl Into<String>) -> Self {
        Error::Line {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn schema(path: &str, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.to_string(),
            message: message.into(),
        }
    }
}
