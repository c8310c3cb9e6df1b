use std::fmt;
use std::process::ExitCode;

use geocal::Error;

/// Failure classes, one per exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad files, flags or data (exit 2).
    Input(String),
    /// Valid input with no acceptable answer (exit 3).
    Infeasible(String),
    /// A broken internal invariant (exit 4).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Input(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Internal(_) => 4,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Infeasible(m) => write!(f, "infeasible: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoFeasibleThreshold { .. } | Error::NotPositiveDefinite { .. } => {
                CliError::Infeasible(e.to_string())
            }
            Error::NumericalUnderflow => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}
