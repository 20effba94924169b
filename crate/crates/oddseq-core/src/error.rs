use alloc::string::String;

/// Error categories shared by every module. The CLI maps them to exit codes.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Caller passed inconsistent or unsupported arguments.
    #[error("usage error: {0}")]
    Usage(String),
    /// Argument outside the mathematical domain (pole, unsupported order).
    #[error("domain error: {0}")]
    Domain(String),
    /// Computation would exceed configured resources.
    #[error("resource error: {0}")]
    Resource(String),
    /// Sign of a false-theta term sits on the guard band.
    #[error("boundary error: {0}")]
    Boundary(String),
    /// An internal structural check failed (e.g. a matrix is not in SL2(Z)).
    #[error("structural error: {0}")]
    Structural(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! usage {
    ($($t:tt)*) => { $crate::error::Error::Usage(alloc::format!($($t)*)) };
}
macro_rules! domain {
    ($($t:tt)*) => { $crate::error::Error::Domain(alloc::format!($($t)*)) };
}
macro_rules! resource {
    ($($t:tt)*) => { $crate::error::Error::Resource(alloc::format!($($t)*)) };
}
pub(crate) use {domain, resource, usage};
