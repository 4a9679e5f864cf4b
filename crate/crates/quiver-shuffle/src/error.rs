use alloc::string::String;
use core::fmt;

/// Errors reported by the library.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    DivisionByZero,
    /// A specialized denominator vanished identically.
    SpecializationPole,
    /// A denominator vanished at a numeric evaluation point.
    EvaluationPole,
    Parse(String),
    UnknownVertex(String),
    UnknownParameter(String),
    Arity { expected: usize, found: usize },
    DegreeMismatch,
    ContextMismatch(String),
    NotSymmetric,
    DuplicateBinding(String),
    CapExceeded { cap: usize },
    /// Parameters or specialization make a structure that should be regular singular.
    Degenerate(String),
    NotInShuffleAlgebra(String),
    ZeroInput,
    Invalid(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DivisionByZero => f.write_str("division by zero"),
            Error::SpecializationPole => f.write_str("specialization pole: denominator vanishes identically"),
            Error::EvaluationPole => f.write_str("evaluation error: denominator vanishes at the given point"),
            Error::Parse(m) => write!(f, "parse error: {m}"),
            Error::UnknownVertex(v) => write!(f, "unknown vertex {v:?}"),
            Error::UnknownParameter(p) => write!(f, "unknown parameter {p:?}"),
            Error::Arity { expected, found } => write!(f, "arity mismatch: expected {expected}, found {found}"),
            Error::DegreeMismatch => f.write_str("degree vectors differ"),
            Error::ContextMismatch(m) => write!(f, "context mismatch: {m}"),
            Error::NotSymmetric => f.write_str("term map is not symmetric within each vertex"),
            Error::DuplicateBinding(s) => write!(f, "slot {s} bound twice"),
            Error::CapExceeded { cap } => write!(f, "cap exceeded: more than {cap} vertices"),
            Error::Degenerate(m) => write!(f, "degenerate parameters: {m}"),
            Error::NotInShuffleAlgebra(m) => write!(f, "not in shuffle algebra / degenerate parameters: {m}"),
            Error::ZeroInput => f.write_str("input must be nonzero"),
            Error::Invalid(m) => write!(f, "invalid input: {m}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
