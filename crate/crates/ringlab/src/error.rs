//! Error types shared across the engine.

use thiserror::Error;

/// Errors raised by ring construction, enumeration and the element engines.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("enumeration cap exceeded: ring has {cardinality} elements, cap is {cap}")]
    CapExceeded { cardinality: u128, cap: u64 },

    #[error("ring is infinite; exhaustive enumeration is unavailable")]
    InfiniteRing,

    #[error("invalid ring descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("characteristic is zero; CRT splitting needs positive characteristic")]
    CharZero,

    #[error("not an ideal: {0}")]
    NotAnIdeal(String),

    #[error("not a nil ideal: {witness} is not nilpotent")]
    NotNilIdeal { witness: String },

    #[error("invalid witness: a^{m} - a^{n} does not lie in the ideal")]
    WitnessInvalid { m: u64, n: u64 },

    #[error("element is not periodic: {obstruction}")]
    NotPeriodic { obstruction: String },

    #[error("operation needs a {expected} ring, got {found}")]
    WrongKind { expected: String, found: String },
}

/// Errors raised by the spec DSL and element-literal parsers.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: expected {expected}")]
    Syntax { pos: usize, expected: String },

    #[error("semantic error at byte {pos}: {msg}")]
    Semantic { pos: usize, msg: String },

    #[error("wrong shape: {msg}")]
    WrongShape { msg: String },
}

impl ParseError {
    /// Byte offset the error points at, when one applies.
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::Semantic { pos, .. } => Some(*pos),
            ParseError::WrongShape { .. } => None,
        }
    }
}
