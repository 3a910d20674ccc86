use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(&'static str),

    /// A value would not fit the 64-bit integer width.
    #[error("range error: {0}")]
    Range(&'static str),

    /// An enumeration was refused because it exceeds its budget.
    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    Budget {
        what: &'static str,
        needed: u128,
        budget: u128,
    },
}

pub type Result<T> = core::result::Result<T, Error>;
