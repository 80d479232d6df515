use thiserror::Error;

/// Errors produced by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value {value} is out of range (limit {limit})")]
    OutOfRange { value: String, limit: String },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("ground set of size {0} exceeds the 64-element bitmask limit")]
    GroundSetOverflow(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("greedy bucketing produced only {achieved} of {target} requested blocks")]
    Shortfall { achieved: usize, target: usize },

    #[error("enumeration of {requested} elements exceeds the cap of {cap}")]
    CapExceeded { requested: u128, cap: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
