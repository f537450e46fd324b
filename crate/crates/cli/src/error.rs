use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0}")]
    Runtime(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn constraint(field: &str, constraint: &str) -> Self {
        CliError::Config(format!("constraint violated: {field}: {constraint}"))
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 for configuration problems, 2 for everything that fails at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) | CliError::Io { .. } => 2,
        }
    }
}

/// Core errors raised while reading a config are configuration errors.
impl From<bimodal_core::Error> for CliError {
    fn from(e: bimodal_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub(crate) fn runtime(e: bimodal_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}
