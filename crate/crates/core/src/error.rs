use thiserror::Error;

use crate::pkg::PkgError;

/// Failure reading or writing one of the line-delimited file formats.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {source}")]
    Record {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("bad header: {0}")]
    Header(String),
    #[error(transparent)]
    Graph(#[from] PkgError),
}
