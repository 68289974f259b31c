use num_bigint::BigInt;
use thiserror::Error;

use crate::stream::TimeoutDiagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{p} is not prime")]
    NotPrime { p: BigInt },

    #[error("exponent must be at least 1")]
    ZeroExponent,

    #[error("{q} is not a power of a single prime")]
    NotAPrimePower { q: BigInt },

    #[error("{value} is not a unit modulo {modulus}")]
    NotAUnit { value: BigInt, modulus: BigInt },

    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("source and destination are both {index}")]
    AliasedOperands { index: usize },

    #[error("dimension mismatch: {left_rows}x{left_cols} against {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("stream exhausted after {available} rows ({requested} requested)")]
    StreamExhausted { requested: usize, available: usize },

    #[error("stream ended without a terminating '.' line after {rows} rows")]
    StreamTruncated { rows: usize },

    #[error("more rows than columns cannot form a basis ({rows}x{cols})")]
    TooManyRows { rows: usize, cols: usize },

    #[error("no pivot in row {row}: the rows do not form a basis modulo {modulus}")]
    NotABasisModP { row: usize, modulus: BigInt },

    #[error("{0}")]
    StabilizationTimeout(Box<TimeoutDiagnostic>),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("boolean algebra with {atoms} atoms is not supported (maximum {max})")]
    TooManyAtoms { atoms: usize, max: usize },

    #[error("invalid idempotent order: {0}")]
    InvalidOrder(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}
