use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An exact intermediate would not fit the 128-bit working width.
    #[error("arithmetic overflow: {0}")]
    Overflow(&'static str),
    /// An argument lies outside the range covered by a precomputed table.
    #[error("{what} = {value} exceeds the table bound {bound}")]
    RangeExceeded { what: &'static str, value: u64, bound: u64 },
    /// A table was requested above its configured memory cap.
    #[error("sieve bound {requested} exceeds the cap {cap}")]
    CapExceeded { requested: u64, cap: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An error raised while evaluating one identity check.
    #[error("{check}({params}): {source}")]
    Check { check: &'static str, params: String, source: Box<Error> },
}

impl Error {
    /// Capacity errors are the ones caused by a limit (width, table bound,
    /// memory cap) rather than by malformed arguments.
    pub fn is_capacity(&self) -> bool {
        match self {
            Error::Overflow(_) | Error::RangeExceeded { .. } | Error::CapExceeded { .. } => true,
            Error::Check { source, .. } => source.is_capacity(),
            _ => false,
        }
    }
}
