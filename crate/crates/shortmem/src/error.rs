//! Error type shared by all modules.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Index demanded outside the valid range of a stream or grid.
    IndexOutOfRange { index: i64, lo: i64, hi: i64 },
    /// `first > last` in a stream request.
    InvalidRange { first: i64, last: i64 },
    /// A computation would exceed the configured index/work capacity.
    CapacityExceeded { needed: u128, capacity: u128 },
    /// Coefficient tail mass beyond the stored window exceeds the filter
    /// threshold; widen the window or relax the threshold.
    TailAboveThreshold { tail: f64, threshold: f64 },
    /// Operation requires causal coefficients (`a_j = 0` for `j < 0`).
    NonCausal,
    /// Path and Brownian grid were built with different `n` or scale.
    GridMismatch { expected: usize, got: usize },
    InvalidParameter { name: &'static str, reason: &'static str },
    /// Adaptive quadrature hit its depth limit before reaching tolerance.
    QuadratureDidNotConverge,
    /// Operation not defined for this innovation variant.
    UnsupportedModel { operation: &'static str, needed: &'static str },
    /// Error raised while processing one ensemble cell, with its coordinates.
    Cell { n: usize, replicate: usize, source: Box<Error> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::IndexOutOfRange { index, lo, hi } => {
                write!(f, "index {index} outside [{lo}, {hi}]")
            }
            Error::InvalidRange { first, last } => {
                write!(f, "invalid range: first {first} > last {last}")
            }
            Error::CapacityExceeded { needed, capacity } => {
                write!(f, "capacity exceeded: need {needed}, capacity {capacity}")
            }
            Error::TailAboveThreshold { tail, threshold } => {
                write!(f, "coefficient tail mass {tail:e} above threshold {threshold:e}")
            }
            Error::NonCausal => write!(f, "operation requires causal coefficients"),
            Error::GridMismatch { expected, got } => {
                write!(f, "grid length mismatch: path n = {expected}, grid n = {got}")
            }
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::QuadratureDidNotConverge => write!(f, "quadrature did not converge"),
            Error::UnsupportedModel { operation, needed } => {
                write!(f, "{operation} requires {needed}")
            }
            Error::Cell { n, replicate, source } => {
                write!(f, "cell (n = {n}, replicate = {replicate}): {source}")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Attach ensemble-cell coordinates to an error.
    pub fn in_cell(self, n: usize, replicate: usize) -> Error {
        Error::Cell { n, replicate, source: Box::new(self) }
    }
}
