use shellkp::SpectralError;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numerical,
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Config,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Numerical,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
        }
    }

    /// `error[config]: ...` on a single line.
    pub fn line(&self) -> String {
        let tag = match self.kind {
            ErrorKind::Config => "config",
            ErrorKind::Numerical => "numerical",
        };
        let msg: String = self.message.split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error[{tag}]: {msg}")
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::ConstraintViolation { .. }
            | SpectralError::UnclassifiableInteraction { .. }
            | SpectralError::InvalidInput(_)
            | SpectralError::GridMisaligned { .. } => CliError::config(e.to_string()),
            _ => CliError::numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::config(format!("i/o: {e}"))
    }
}
