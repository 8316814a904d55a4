use std::path::{Path, PathBuf};

use hanabi_core::orchestrator::OrchestratorError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("config: {0}")]
    Config(String),
    #[error("run directory {0} is not empty")]
    RunDirNotEmpty(PathBuf),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Orchestrator(#[from] OrchestratorError),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }

    pub fn json(path: &Path, source: serde_json::Error) -> Self {
        HarnessError::Json { path: path.to_path_buf(), source }
    }
}
