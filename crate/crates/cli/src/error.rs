use std::process::ExitCode;

use thiserror::Error;

/// Failure classes of the command-line tool, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid flags or flag values (exit 2).
    #[error("usage error: {0}")]
    Usage(String),
    /// Unreadable, malformed or unsuitable input data (exit 3).
    #[error("data error: {0}")]
    Data(String),
    /// A numerical routine failed (exit 4).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Data(_) => 3,
            Self::Numerical(_) => 4,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Self::Data(msg.into())
    }
}

impl From<dirstat::Error> for CliError {
    fn from(e: dirstat::Error) -> Self {
        use dirstat::Error as E;
        match e {
            E::NonConvergence { .. }
            | E::NonFinite(_)
            | E::BracketViolation { .. }
            | E::RejectionCap(_)
            | E::ZeroDensity { .. }
            | E::Unbounded(_) => Self::Numerical(e.to_string()),
            E::Domain(_)
            | E::DimensionMismatch { .. }
            | E::ZeroWeight
            | E::UndefinedMean
            | E::InvalidInput(_) => Self::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
