use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config {path}, line {line}: {msg}")]
    ConfigParse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("config key `{key}`: {msg}")]
    Invalid { key: String, msg: String },

    #[error(transparent)]
    Core(#[from] subdiff_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("{failed} of {total} checks failed")]
    Verify { failed: usize, total: usize },
}

impl CliError {
    pub fn invalid(key: &str, msg: impl Into<String>) -> Self {
        CliError::Invalid {
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::ConfigParse { .. } | CliError::Invalid { .. } => "config",
            CliError::Core(e) => e.category(),
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
            CliError::Verify { .. } => "verify",
        }
    }
}
