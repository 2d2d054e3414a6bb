use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type BenchResult<T> = std::result::Result<T, BenchError>;

impl BenchError {
    /// 2 for configuration or validation errors, 3 for I/O, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Io { .. } => 3,
            BenchError::Numerical(_) => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io { path: path.to_path_buf(), source }
    }
}

impl From<qcnn_core::Error> for BenchError {
    fn from(e: qcnn_core::Error) -> Self {
        if e.is_numerical() {
            BenchError::Numerical(e.to_string())
        } else {
            BenchError::Config(e.to_string())
        }
    }
}
