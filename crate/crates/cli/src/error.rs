use thiserror::Error;

/// Failure classes map onto the exit codes stated in the CLI help:
/// 2 config, 3 numeric/runtime, 4 check-failed.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] identlab_core::Error),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("{failed} built-in check(s) failed")]
    CheckFailed { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
            CliError::CheckFailed { .. } => 4,
        }
    }
}
