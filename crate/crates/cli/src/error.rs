use std::path::Path;

use autoredux::autoreduce::AutoreduceError;
use autoredux::cototal::CototalError;
use autoredux::diagonal::DiagonalError;
use autoredux::enumop::EnumOpError;
use autoredux::prefixmachine::MachineError;
use autoredux::universe::UniverseError;
use autoredux::witness::WitnessError;

/// Everything a subcommand can fail with, each mapped to a short code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error(transparent)]
    Operator(#[from] EnumOpError),
    #[error(transparent)]
    Autoreduce(#[from] AutoreduceError),
    #[error(transparent)]
    Cototal(#[from] CototalError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Diagonal(#[from] DiagonalError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn parse(path: &Path, message: impl ToString) -> Self {
        CliError::Parse {
            path: path.display().to_string(),
            message: message.to_string(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
            CliError::Parse { .. } => "parse",
            CliError::Universe(_) => "universe",
            CliError::Operator(_) => "operator",
            CliError::Autoreduce(AutoreduceError::GuardExceeded { .. }) => "guard",
            CliError::Autoreduce(_) => "autoreduce",
            CliError::Cototal(_) => "cototal",
            CliError::Machine(_) => "machine",
            CliError::Diagonal(DiagonalError::UniverseTooSmall { .. }) => "universe-too-small",
            CliError::Diagonal(_) => "diag",
            CliError::Witness(_) => "witness",
        }
    }

    pub fn exit_status(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            _ => 1,
        }
    }
}
