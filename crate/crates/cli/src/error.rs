use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] qgs_core::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0} check(s) failed")]
    VerifyFailed(usize),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 0 ok, 1 failed verification, 2 usage or configuration, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use qgs_core::Error as E;
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Config(_) | CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Core(
                E::Instability(_) | E::NonFinitePosition { .. } | E::NotGeodesic(_) | E::NonZeroMean(_),
            ) => 3,
            CliError::Core(_) => 2,
        }
    }
}

pub fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
