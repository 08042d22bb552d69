use thiserror::Error;

use crate::exactnum::Rat;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {value} lies outside the rate function domain (T >= {start})")]
    Domain { value: Rat, start: Rat },

    #[error("comparison undecidable at {bits} bits: {context}")]
    Undecidable { bits: u32, context: String },

    #[error("non-positive operand: {0}")]
    NonPositive(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("rank deficiency: {0}")]
    Rank(String),

    #[error("invalid rate function: {0}")]
    InvalidRate(String),

    /// A hypothesis of the main theorem is violated; `cites` is the condition that breaks.
    #[error("{what} (violates \"{cites}\")")]
    Hypothesis { what: String, cites: &'static str },

    #[error("search box has {0} candidate points, above the 10^9 guard")]
    BoxTooLarge(u128),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
