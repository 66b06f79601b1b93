use std::fmt;

use sdcons::Error as CoreError;

/// Failure classes; each maps to one process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A monitored property failed (exit 1). Carries the full report.
    #[error("{0}")]
    Violation(String),
    /// A standing assumption of the method does not hold (exit 2).
    #[error("{0}")]
    Assumption(String),
    /// Malformed scenario, model or command line (exit 3).
    #[error("{0}")]
    Parse(String),
    /// Reading or writing files failed (exit 4).
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Assumption(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn io(path: impl fmt::Display, err: std::io::Error) -> Self {
        CliError::Io(format!("{path}: {err}"))
    }
}

/// Classifies an error raised while synthesizing gains.
pub fn synthesis_error(err: CoreError) -> CliError {
    match err {
        e @ CoreError::NotStabilizable { .. } => CliError::Assumption(format!("Assumption 1 violated: {e}")),
        CoreError::NotReachable { node } => CliError::Assumption(format!(
            "Assumption 2 violated: follower {node} is not reachable from the leader"
        )),
        CoreError::NotMMatrix => {
            CliError::Assumption("Assumption 2 violated: H is not a nonsingular M-matrix".into())
        }
        e @ (CoreError::CommonDNotFound { .. }
        | CoreError::InvalidScaling { .. }
        | CoreError::DConstructionFailure { .. }) => CliError::Assumption(format!("Assumption 3 violated: {e}")),
        e @ CoreError::EnumerationTooLarge { .. } => CliError::Assumption(e.to_string()),
        e @ (CoreError::InvalidMatrix(_)
        | CoreError::InvalidTopology(_)
        | CoreError::InvalidSignal(_)
        | CoreError::DimensionMismatch(_)) => CliError::Parse(e.to_string()),
        e => CliError::Assumption(format!("synthesis failed: {e}")),
    }
}

/// Classifies an error raised while simulating or monitoring.
pub fn simulation_error(err: CoreError) -> CliError {
    match err {
        e @ (CoreError::InvalidSchedule(_) | CoreError::DimensionMismatch(_) | CoreError::InvalidTime(_)) => {
            CliError::Parse(e.to_string())
        }
        e => CliError::Violation(format!("simulation failed: {e}")),
    }
}
