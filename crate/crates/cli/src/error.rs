use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NEGATIVE: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input: files, flags, patterns.
    #[error("{0}")]
    Input(String),
    /// The computation finished and the answer is no.
    #[error("{0}")]
    Negative(String),
    #[error("{0}")]
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Negative(_) => EXIT_NEGATIVE,
            CliError::NonConvergence(_) => EXIT_NONCONVERGENCE,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    /// Prefixes the message with where it came from.
    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Input(m) => CliError::Input(format!("{what}: {m}")),
            CliError::Negative(m) => CliError::Negative(format!("{what}: {m}")),
            CliError::NonConvergence(m) => CliError::NonConvergence(format!("{what}: {m}")),
        }
    }
}

impl From<localham::Error> for CliError {
    fn from(e: localham::Error) -> Self {
        use localham::Error as E;
        match e {
            E::NotKCorrelated(_) | E::NoParentFound(_) | E::Precondition(_) => CliError::Negative(e.to_string()),
            E::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
