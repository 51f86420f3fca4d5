use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty corpus: {0}")]
    EmptyCorpus(String),
    #[error("memory budget exceeded: {needed} bytes needed, budget is {budget} bytes; use the memory-efficient trainer (mehac) instead")]
    MemoryBudget { needed: u64, budget: u64 },
    #[error("topic count mismatch: model has {model}, truth has {truth}")]
    TopicCountMismatch { model: usize, truth: usize },
    #[error("degenerate model: {0}")]
    DegenerateModel(String),
    #[error("unsupported model file version {0}")]
    Version(u32),
}

impl Error {
    /// Stable snake_case name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::EmptyCorpus(_) => "empty_corpus",
            Error::MemoryBudget { .. } => "memory_budget",
            Error::TopicCountMismatch { .. } => "topic_count_mismatch",
            Error::DegenerateModel(_) => "degenerate_model",
            Error::Version(_) => "version",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
