use thiserror::Error;

/// Failures surfaced to the user as `error[<code>]: <message>` on stderr.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("no interval of this width exists at this level")]
    NotExists,
    #[error("{0}")]
    NoSolution(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "invalid-args",
            CliError::NotExists => "not-exists",
            CliError::NoSolution(_) => "no-solution",
            CliError::Io { .. } => "io",
            CliError::Parse(_) => "parse",
        }
    }

    pub fn exit_status(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::NotExists => 3,
            CliError::Io { .. } => 4,
            CliError::Parse(_) => 5,
            CliError::NoSolution(_) => 6,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

impl From<pushci::Error> for CliError {
    fn from(e: pushci::Error) -> Self {
        use pushci::Error as E;
        match e {
            E::NotExists => CliError::NotExists,
            E::NoSolution => CliError::NoSolution(e.to_string()),
            E::InvalidGrid(_)
            | E::InvalidFamily(_)
            | E::WidthOutOfRange { .. }
            | E::InvalidLevel(_)
            | E::OutOfSupport(_)
            | E::InvalidArgument(_)
            | E::RecursionMismatch(_)
            | E::Unsupported(_) => CliError::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
