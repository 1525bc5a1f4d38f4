use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: line {line}: {reason}")]
    Parse { path: PathBuf, line: u64, reason: String },

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Core(#[from] geodp::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("audit failed: {0}")]
    AuditFailed(String),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

impl HarnessError {
    /// Process exit status: 2 for configuration problems, 3 for data or
    /// format problems, 4 for a failed audit.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Core(geodp::Error::Configuration(_)) => 2,
            HarnessError::AuditFailed(_) => 4,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }
}
