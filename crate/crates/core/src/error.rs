use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("extension degree must be at least 1")]
    ZeroDegree,

    #[error("field of order {order} exceeds the table cap of {cap} elements (needs about {bytes} bytes of tables)")]
    TableCap { order: u128, cap: u64, bytes: u128 },

    #[error("enumeration of {points} points exceeds the budget of {budget}; lower k or n, or raise the budget with --force/--budget")]
    Budget { points: u128, budget: u128 },

    #[error("the parameter b must be a nonzero field element")]
    ZeroB,

    #[error("conductor mismatch: {0}")]
    Conductor(String),

    #[error("p = {p} divides n + 1 = {n1}: the auxiliary Laurent polynomial is degenerate")]
    Degenerate { p: u64, n1: u64 },

    #[error("non-integral L-polynomial coefficient at index {0}")]
    NonIntegral(usize),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("polytope is not full-dimensional: affine hull has dimension {hull} < {dim}")]
    NotFullDimensional { hull: usize, dim: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("facet {0} is not simplicial; only diagonal facets are supported")]
    NonSimplicialFacet(String),

    #[error("internal consistency check failed: {0}")]
    Mismatch(String),

    #[error("root finding did not converge (residual {0:e})")]
    RootFinding(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
