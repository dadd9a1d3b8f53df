use thiserror::Error;

use crate::interval::Interval;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: Interval,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Every point of a search grid was infeasible.
    #[error("no feasible point among {evaluated} grid points")]
    Infeasible { evaluated: usize },

    /// A validity condition of a bound failed; the value must not be used.
    #[error("validity condition failed: {0}")]
    Validity(String),

    /// The target expectation is infinite.
    #[error("singularity: {0}")]
    Singularity(String),

    #[error("oracle failure: {0}")]
    Oracle(String),
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
