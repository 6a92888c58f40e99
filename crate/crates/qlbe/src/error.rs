use serde::Serialize;
use thiserror::Error;

/// Failure of a command-line run.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error(transparent)]
    Core(#[from] qlbe_core::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    Threads(String),
}

/// Machine-readable error record written to stderr on failure.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub kind: &'static str,
    pub messages: Vec<String>,
}

impl RunError {
    pub fn record(&self) -> ErrorRecord {
        let (kind, messages) = match self {
            RunError::Config(v) => ("config", v.clone()),
            RunError::Core(e) => ("numerics", vec![e.to_string()]),
            RunError::Io { .. } => ("io", vec![self.to_string()]),
            RunError::Threads(m) => ("threads", vec![m.clone()]),
        };
        ErrorRecord {
            status: "error",
            kind,
            messages,
        }
    }
}

pub type Result<T> = std::result::Result<T, RunError>;
