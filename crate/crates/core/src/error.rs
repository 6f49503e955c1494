use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
    Internal,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what}: n = {n} exceeds the cap {cap}")]
    SizeLimit { what: &'static str, n: usize, cap: usize },

    #[error("series order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("coefficient t^{n} requested from a series truncated at order {order}")]
    OrderExceeded { n: usize, order: usize },

    #[error("series constant term must be {expected}, found {found}")]
    ConstantTerm { expected: f64, found: Complex64 },

    #[error("point outside the admissible domain: {0}")]
    Domain(String),

    #[error("truncation bound {bound:e} exceeds the requested tolerance {tolerance:e}")]
    TruncationExceeded { bound: f64, tolerance: f64 },

    #[error("gamma function pole at {0}")]
    Pole(Complex64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed bit word: {0}")]
    MalformedWord(String),

    #[error("horizon {n} requires a sample longer than {len}")]
    HorizonExceedsSample { n: usize, len: usize },

    #[error("index out of bounds: {0}")]
    IndexOutOfBounds(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("numerical check failed: {0}")]
    Numerical(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::TruncationExceeded { .. } | Error::Pole(_) | Error::Numerical(_) => {
                ErrorClass::Numerical
            }
            _ => ErrorClass::Validation,
        }
    }

    /// Short machine-readable tag.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::SizeLimit { .. } => "size_limit",
            Error::OrderMismatch { .. } => "order_mismatch",
            Error::OrderExceeded { .. } => "order_exceeded",
            Error::ConstantTerm { .. } => "constant_term",
            Error::Domain(_) => "domain",
            Error::TruncationExceeded { .. } => "truncation_exceeded",
            Error::Pole(_) => "pole",
            Error::InvalidInput(_) => "invalid_input",
            Error::MalformedWord(_) => "malformed_word",
            Error::HorizonExceedsSample { .. } => "horizon_exceeds_sample",
            Error::IndexOutOfBounds(_) => "index_out_of_bounds",
            Error::Parse { .. } => "parse",
            Error::Numerical(_) => "numerical",
        }
    }
}
