//! CLI error type with the documented exit-code mapping.

use std::fmt;

use ssreg_core::Error as CoreError;

/// Errors surfaced by the harness. Exit codes: 0 success, 2 config or
/// precondition error, 3 divergence, 4 estimator failure.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Estimator(String),
    Diverged { step: usize },
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Diverged { .. } => 3,
            CliError::Estimator(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Estimator(msg) => write!(f, "estimator failure: {msg}"),
            CliError::Diverged { step } => write!(f, "closed loop diverged at step {step}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::DataNotExciting { .. }
            | CoreError::DataInconsistent { .. }
            | CoreError::IllConditioned(_)
            | CoreError::Overflow { .. } => CliError::Estimator(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
