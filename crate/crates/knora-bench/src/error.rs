//! Harness error type. The CLI maps `Config` to exit code 1 and
//! `Data`/`Io` to exit code 2.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<knora::Error> for HarnessError {
    fn from(e: knora::Error) -> Self {
        HarnessError::Data(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
