use std::path::Path;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag values or unreadable problem files.
    #[error("{0}")]
    Usage(String),

    #[error("{path}:{line}:{column}: {message}")]
    Spec {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("solver error: {0}")]
    Solver(#[from] iimhhl::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(context: impl AsRef<Path>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.as_ref().display().to_string(),
            source,
        }
    }

    /// 2 for spec or flag errors, 1 for everything that failed while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Spec { .. } => 2,
            _ => 1,
        }
    }
}
