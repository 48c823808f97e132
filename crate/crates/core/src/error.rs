use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by scorer backends (in-process or remote).
#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("server returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unknown statement text {0:?}")]
    UnknownText(String),
    #[error("backend does not support {0}")]
    Unsupported(&'static str),
    #[error("injected failure: {0}")]
    Injected(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no manifest found in {}", .0.display())]
    MissingManifest(PathBuf),
    #[error("{}:{line}: {message}", file.display())]
    Malformed {
        file: PathBuf,
        line: usize,
        message: String,
    },
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("template {template:?}: {message}")]
    Template { template: String, message: String },
    #[error("statement: {0}")]
    Statement(String),
    #[error("scoring config: {0}")]
    Config(String),
    #[error("no scoped tokens")]
    NoScopedTokens,
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("scoring {statement:?} (instance {instance_id}, answer {answer_id}): {source}")]
    Scoring {
        instance_id: String,
        answer_id: String,
        statement: String,
        #[source]
        source: Box<Error>,
    },
    #[error("metrics: {0}")]
    Metrics(String),
    #[error("report: {0}")]
    Report(String),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the failure originated in a scorer backend, possibly wrapped
    /// with statement identity.
    pub fn is_backend(&self) -> bool {
        match self {
            Error::Backend(_) => true,
            Error::Scoring { source, .. } => source.is_backend(),
            _ => false,
        }
    }
}
