use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error("override `{key}`: {message}")]
    Override { key: String, message: String },
    #[error("{}: not a usable policy file: {reason}", path.display())]
    Policy { path: PathBuf, reason: String },
    #[error("{}: not a usable economy snapshot: {reason}", path.display())]
    Snapshot { path: PathBuf, reason: String },
    #[error(transparent)]
    Model(#[from] rmabm_core::Error),
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

impl From<rmabm_core::ConfigError> for Error {
    fn from(e: rmabm_core::ConfigError) -> Self {
        Error::Model(e.into())
    }
}

pub(crate) trait IoContext<T> {
    fn at(self, path: &Path) -> Result<T, Error>;
}

impl<T> IoContext<T> for Result<T, io::Error> {
    fn at(self, path: &Path) -> Result<T, Error> {
        self.map_err(|source| Error::Io { path: path.to_path_buf(), source })
    }
}

impl<T> IoContext<T> for Result<T, csv::Error> {
    fn at(self, path: &Path) -> Result<T, Error> {
        self.map_err(|source| Error::Csv { path: path.to_path_buf(), source })
    }
}

impl<T> IoContext<T> for Result<T, serde_json::Error> {
    fn at(self, path: &Path) -> Result<T, Error> {
        self.map_err(|source| Error::Json { path: path.to_path_buf(), source })
    }
}
