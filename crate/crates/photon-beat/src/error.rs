use std::path::PathBuf;

use photon_beat_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] CoreError),
    /// A core error raised while analysing data rather than validating input.
    #[error("analysis failed: {0}")]
    Analysis(CoreError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 0 success, 1 computational failure, 2 usage or configuration error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Format { .. } => 2,
            CliError::Core(CoreError::Config(_) | CoreError::Domain(_) | CoreError::Unsupported(_)) => 2,
            CliError::Core(_) | CliError::Analysis(_) | CliError::Io { .. } => 1,
        }
    }
}
