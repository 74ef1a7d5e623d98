use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid base {0}: bases must lie in 2..=64")]
    InvalidBase(u32),

    #[error("digit {digit} at position {position} is out of range for base {base}")]
    InvalidDigit {
        digit: u8,
        position: usize,
        base: u8,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value is not in the support of the construction law: {0}")]
    NotInSupport(String),

    #[error("{what} = {value} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    #[error("equation has no solution: {0}")]
    NoSolution(String),

    #[error("parameter excluded from the domain: {0}")]
    ExcludedParameter(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource error: {0}")]
    Resource(String),

    #[error("checkpoint format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used in JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidBase(_) => "invalid-base",
            Error::InvalidDigit { .. } => "invalid-digit",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::NotInSupport(_) => "not-in-support",
            Error::TooLarge { .. } => "too-large",
            Error::NoSolution(_) => "no-solution",
            Error::ExcludedParameter(_) => "excluded-parameter",
            Error::NotFound(_) => "not-found",
            Error::InvalidInput(_) => "invalid-input",
            Error::Resource(_) => "resource",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }

    /// True for failures caused by the environment (memory, files) rather than the computation.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource(_) | Error::Io(_) | Error::Format(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
