use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("invalid arguments: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    File { path: PathBuf, source: ifs_jacobi::Error },

    #[error(transparent)]
    Core(#[from] ifs_jacobi::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Usage(_) => "UsageError",
            CliError::File { source, .. } => source.kind(),
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "IoError",
        }
    }
}
