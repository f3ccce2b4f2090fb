use thiserror::Error;
use widom_tau::TauError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("spec error: {0}")]
    Spec(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] TauError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 2,
            CliError::Spec(_) | CliError::Io(_) => 1,
        }
    }
}
