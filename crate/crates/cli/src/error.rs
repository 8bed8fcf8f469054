use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error at `{key}`: {message}")]
    Schema { key: String, message: String },
    #[error("conflicting settings: {0}")]
    Conflict(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] ham_levy::Error),
}

impl CliError {
    pub fn schema(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema { key: key.into(), message: message.into() }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Schema { .. } => "schema_error",
            CliError::Conflict(_) => "conflict_error",
            CliError::Io { .. } => "io_error",
            CliError::Core(e) => e.code(),
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            code: self.code(),
            key: match self {
                CliError::Schema { key, .. } => Some(key.clone()),
                _ => None,
            },
            message: self.to_string(),
        }
    }
}

/// Machine-readable form of an error for the JSON summary.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub code: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    pub message: String,
}

pub type CliResult<T> = std::result::Result<T, CliError>;
