use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("shifted operator is singular at shift {0}")]
    SpectralClash(f64),
    #[error("outside validity region: {0}")]
    Validity(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
