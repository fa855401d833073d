use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid field specification `{0}`")]
    InvalidFieldSpec(String),
    #[error("polynomial 0x{poly:X} does not define GF(2^{m})")]
    NotAField { m: u32, poly: u32 },
    #[error("value {value} is not an element of GF(2^{m})")]
    ElementOutOfRange { value: u32, m: u32 },
    #[error("field mismatch: expected {expected}, found {found}")]
    FieldMismatch { expected: String, found: String },
    #[error("division by zero in GF(2^m)")]
    DivisionByZero,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix does not have full column rank (rank {rank} < {cols} columns)")]
    NotFullColumnRank { rank: usize, cols: usize },
    #[error("instance exceeds configured limits: {0}")]
    TooLarge(String),
    #[error("sequence is not defined at time {0}")]
    SequenceUndefined(i64),
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("initialization failed for sink `{sink}`: {reason}")]
    InitializationFailure { sink: String, reason: String },
    #[error("sink `{sink}` cannot decode: transfer matrix rank {rank} < {inputs} inputs; reduce source rates")]
    Undecodable { sink: String, rank: usize, inputs: usize },
    #[error("need received symbols up to time {needed}, have up to {available}")]
    NeedsMoreSymbols { needed: i64, available: i64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
