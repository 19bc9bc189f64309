use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("unknown symbol `{name}` at byte {offset}")]
    UnknownSymbol { name: String, offset: usize },
    #[error("denominator must be a single monomial, got `{0}`")]
    SumDenominator(String),
    #[error("jet order {requested} exceeds the configured bound {bound}")]
    OrderOverflow { requested: usize, bound: usize },
    #[error("no PDE bound while rewriting `{0}`")]
    UnboundPde(String),
    #[error("invalid PDE: {0}")]
    InvalidPde(String),
    #[error("parameter validation failed: {0}")]
    Validation(String),
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("no match: {0}")]
    NoMatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
