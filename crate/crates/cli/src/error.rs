use pressure_lab::{ErrorKind, LabError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numeric(String),
    #[error(transparent)]
    Lab(#[from] LabError),
}

impl CliError {
    /// 1 configuration, 2 resource (including I/O and insufficient data),
    /// 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Lab(e) => match e.kind() {
                ErrorKind::Input => 1,
                ErrorKind::Resource => 2,
                ErrorKind::Numeric => 3,
            },
        }
    }

    pub fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::Lab(LabError::InsufficientData(_)) => {
                Some("rerun with a larger --max-len; the entropy window is the top half of the complete range")
            }
            CliError::Lab(LabError::ResourceLimit(_)) => Some("lower --max-len or --depth"),
            _ => None,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
