use thiserror::Error;

/// Errors produced by the engines. The variants map onto the CLI exit
/// codes: `Input`/`Domain`/`Validation` are usage errors, `Resource` is a
/// budget error.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("degenerate block scheme: block sum F_{t} is zero")]
    DegenerateBlock { t: u32 },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
