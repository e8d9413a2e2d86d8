use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(ctdper_core::Error),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    /// Bad user input reported by the core crate.
    pub fn config(e: ctdper_core::Error) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Validation(_) => 4,
        }
    }
}

impl From<ctdper_core::Error> for CliError {
    fn from(e: ctdper_core::Error) -> Self {
        match e {
            ctdper_core::Error::InvalidParameter { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}
