use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed table: {0}")]
    Parse(String),
    #[error(transparent)]
    Numerical(#[from] largeparam::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Parse(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}
