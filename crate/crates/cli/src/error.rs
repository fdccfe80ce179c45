use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, configs or input files. Exit code 2.
    #[error("{0}")]
    Validation(String),
    /// The computation or writing the results failed. Exit code 3.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn input(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("cannot read {}: {err}", path.display()))
    }

    pub fn output(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("cannot write {}: {err}", path.display()))
    }
}

impl From<smoothsr::Error> for CliError {
    fn from(err: smoothsr::Error) -> Self {
        if err.is_validation() {
            CliError::Validation(err.to_string())
        } else {
            CliError::Runtime(err.to_string())
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Runtime(format!("cannot serialize output: {err}"))
    }
}
