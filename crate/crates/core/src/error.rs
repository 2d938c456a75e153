use thiserror::Error;

/// Errors raised by parsers, validators and transformations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("alphabet mismatch: {0}")]
    Alphabet(String),
    #[error("type error in rule {rule} at {path}: {msg}")]
    Type {
        rule: String,
        path: String,
        msg: String,
    },
    #[error("scheme is not safe: {0}")]
    Unsafe(String),
    #[error("type is not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("scheme has order 0; nothing to reduce")]
    OrderZero,
    #[error("automaton is not one-way: {0}")]
    NotOneWay(String),
    #[error("transducer is not linear: {0}")]
    NotLinear(String),
    #[error("expression is not irreducible: {0}")]
    NotIrreducible(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}
