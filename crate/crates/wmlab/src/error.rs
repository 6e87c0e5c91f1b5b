use thiserror::Error;

/// Crate-wide error type. Variants map onto the CLI exit codes:
/// configuration/domain problems exit 2, protocol violations exit 3,
/// numeric non-convergence exits 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("numeric non-convergence: {0}")]
    Numeric(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::Unsupported(_) | Error::Io(_) => 2,
            Error::Protocol(_) => 3,
            Error::Numeric(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
