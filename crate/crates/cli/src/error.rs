use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failures of the harness layer. Solver errors are wrapped unchanged.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Invalid configuration or flag combination.
    #[error("{0}")]
    Config(String),

    /// A trace file that cannot be read back.
    #[error("{}: {msg}", path.display())]
    Trace { path: PathBuf, msg: String },

    #[error(transparent)]
    Solver(#[from] adaprox::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Config(msg.into()))
}
