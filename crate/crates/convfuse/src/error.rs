use std::io;
use std::path::{Path, PathBuf};

use convfuse_core::Error as CoreError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] CoreError),
    /// A core error raised while processing a particular file.
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: CoreError },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn io(path: &Path) -> impl FnOnce(io::Error) -> Self + '_ {
        move |source| Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path) -> impl FnOnce(csv::Error) -> Self + '_ {
        move |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn file(path: &Path) -> impl FnOnce(CoreError) -> Self + '_ {
        move |source| Error::File {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status: 2 for usage or configuration problems, 3 for
    /// bad or missing data, 4 for numeric failure during training.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Core(CoreError::InvalidArgument(_)) => 2,
            Error::Core(CoreError::NonFinite(_))
            | Error::File {
                source: CoreError::NonFinite(_),
                ..
            } => 4,
            _ => 3,
        }
    }
}
