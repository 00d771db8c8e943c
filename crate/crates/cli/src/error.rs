use shocklab::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("statistical check failed: {0}")]
    Statistical(String),
    #[error("numerical result flagged: {0}")]
    Numerical(String),
    #[error(transparent)]
    Core(Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Statistical(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Core(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { field, reason } => CliError::Usage(format!("{field}: {reason}")),
            Error::Flagged { .. }
            | Error::Singular { .. }
            | Error::IllConditioned { .. }
            | Error::NonConvergence { .. } => CliError::Numerical(e.to_string()),
            e => CliError::Core(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}
