use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite {0}")]
    NonFinite(&'static str),

    #[error("script line {line}: {msg}")]
    Script { line: usize, msg: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid path file: {0}")]
    PathFile(String),

    #[error("log header: {0}")]
    LogHeader(String),

    #[error("log line {line}: {msg}")]
    LogRecord { line: usize, msg: String },

    #[error("log truncated: no footer after last valid t={last_t:?}")]
    LogTruncated { last_t: Option<f64> },

    #[error("log already closed")]
    LogClosed,

    #[error("invalid message: {0}")]
    Message(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
