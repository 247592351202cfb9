use serde::Serialize;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Compute(#[from] predrisk::Error),
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    PropertyFailed(String),
}

/// Machine-readable failure record.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub command: String,
    pub kind: &'static str,
    pub line: Option<usize>,
    pub message: String,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Compute(_) => "ComputationError",
            CliError::File { .. } | CliError::Io(_) => "IoError",
            CliError::Csv(_) | CliError::Json(_) => "SerializationError",
            CliError::PropertyFailed(_) => "PropertyFailed",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    pub fn record(&self, command: &str) -> ErrorRecord {
        let line = match self {
            CliError::Config(e) => e.line(),
            _ => None,
        };
        ErrorRecord { status: "error", command: command.into(), kind: self.kind(), line, message: self.to_string() }
    }
}
