use thiserror::Error;

/// Failure of a CLI command, mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or arguments; exit code 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// Non-finite values or another numerical failure; exit code 3.
    #[error("numerical failure: {0}")]
    Numeric(String),
    /// File system trouble; exit code 1.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<vqt_core::Error> for CliError {
    fn from(e: vqt_core::Error) -> Self {
        use vqt_core::Error as E;
        match e {
            E::Argument(_) | E::Parse { .. } => CliError::Config(e.to_string()),
            E::NonFinite(_) | E::Domain { .. } | E::Fit(_) | E::Structure(_) => CliError::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
