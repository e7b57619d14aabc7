use std::path::PathBuf;

use qkmm_core::QkmmError;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] QkmmError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Output(String),
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for usage/configuration problems, 3 for numeric, validation and I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) | BenchError::Core(QkmmError::Configuration(_)) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
