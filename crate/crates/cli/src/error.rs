use std::fmt;
use std::process::ExitCode;

use probval_core::Error;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config: exit code 2.
    Usage(String),
    /// The computation itself failed: exit code 3.
    Compute(anyhow::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Compute(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Compute(err) => write!(f, "{err:#}"),
        }
    }
}

/// Domain errors from the library are input problems; everything else is a
/// computational failure.
impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::Domain { .. } | Error::CutoffExceedsTrials { .. } => CliError::Usage(err.to_string()),
            other => CliError::Compute(other.into()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(err: anyhow::Error) -> Self {
        CliError::Compute(err)
    }
}
