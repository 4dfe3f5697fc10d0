use thiserror::Error;

/// Failure classes of a command, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed config or flags.
    #[error("usage: {0}")]
    Usage(String),

    #[error("io: {0}")]
    Io(String),

    /// The mathematics refused the input: inadmissible exponents, divergent
    /// constants, a check that cannot run.
    #[error("rejected: {0}")]
    Rejected(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Rejected(_) => 2,
        }
    }
}

impl From<swlab::Error> for CliError {
    fn from(e: swlab::Error) -> Self {
        match e {
            swlab::Error::Io(m) => CliError::Io(m),
            other => CliError::Rejected(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
