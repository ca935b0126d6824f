use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Core(#[from] zsparse_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {message}", path.display())]
    Schema { path: PathBuf, message: String },
}

impl PipelineError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// 0 success, 1 usage/config, 2 numerical, 3 I/O and malformed input files.
    pub fn exit_code(&self) -> i32 {
        use zsparse_core::Error as E;
        match self {
            Self::Usage(_) | Self::Config { .. } => 1,
            Self::Io { .. } | Self::Schema { .. } => 3,
            Self::Core(e) => match e {
                E::Io(_) | E::Format(_) | E::GridMismatch(_) => 3,
                E::InvalidGrid(_) | E::InvalidParameter { .. } | E::LemmaHypothesis { .. } => 1,
                _ => 2,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;
