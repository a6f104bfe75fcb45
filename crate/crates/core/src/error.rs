use thiserror::Error;

/// Errors raised by grid construction, the recursion and interval transforms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid family parameters: {0}")]
    InvalidFamily(&'static str),
    #[error("width index {r} outside 1..={m}")]
    WidthOutOfRange { r: u64, m: u64 },
    #[error("confidence level {0} outside (0, 1)")]
    InvalidLevel(f64),
    #[error("the {0} recursion does not apply to this family or grid")]
    RecursionMismatch(&'static str),
    #[error("no interval of this width exists at this level")]
    NotExists,
    #[error("no width up to the full range admits an interval")]
    NoSolution,
    #[error("observed statistic {0} outside the support")]
    OutOfSupport(f64),
    #[error("operation not defined for this family: {0}")]
    Unsupported(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

/// Crate result alias.
pub type Result<T> = core::result::Result<T, Error>;
