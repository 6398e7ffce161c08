use thiserror::Error;

/// Errors raised by the samplers, summaries and file handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid weights: every log-weight is -inf or NaN")]
    InvalidWeights,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid dataset: {}", .0.join("; "))]
    Dataset(Vec<String>),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("parse error: {0}")]
    Format(String),

    #[error("no retained draws to summarize")]
    EmptyDraws,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("too many cohorts for exact enumeration: {0} (maximum {1})")]
    TooLarge(usize, usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
