use alloc::string::String;

/// Errors raised by the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition does not hold for the given input.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The requested combination of options is not valid.
    #[error("configuration error: {0}")]
    Config(String),
    /// The quantity exists but is not provided for this model.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::Error::Domain(alloc::format!($($arg)*)) };
}
pub(crate) use domain;
