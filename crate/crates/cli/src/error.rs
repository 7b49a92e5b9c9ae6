use thiserror::Error;

/// Runner errors, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    /// 2 for config errors, 3 for I/O failures, 1 for verification
    /// mismatches.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Verify(_) => 1,
        }
    }
}

impl From<mpbo_core::Error> for CliError {
    fn from(e: mpbo_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
