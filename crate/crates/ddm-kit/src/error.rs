use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum KitError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] ddm_core::Error),
    #[error("{0}")]
    Usage(String),
}

impl KitError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        KitError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        KitError::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 2 for bad invocations, 1 for bad data.
    pub fn exit_code(&self) -> i32 {
        match self {
            KitError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, KitError>;
