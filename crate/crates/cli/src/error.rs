use thiserror::Error;

/// Failures of a command, each with its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid machine or run file, or an invalid flag value.
    #[error("{0}")]
    Config(String),
    /// The integration stopped early.
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Proposition(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Drift(String),
    /// Writing an output failed.
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Proposition(_) => 4,
            CliError::Validation(_) => 5,
            CliError::Drift(_) => 6,
        }
    }
}
