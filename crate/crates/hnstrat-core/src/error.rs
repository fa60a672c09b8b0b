//! Shared error type for all formal and concrete operations.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero (zero denominator)")]
    DenominatorZero,

    #[error("invalid test object: {0}")]
    InvalidTestObject(String),

    #[error("complex carries no Harder-Narasimhan data for its cohomologies and images")]
    MissingHNData,

    #[error("epsilon >= bound {bound}")]
    EpsilonTooLarge { bound: String },

    #[error("refined chain is not strictly decreasing: {0}")]
    ChainNotDecreasing(String),

    #[error("filtration data is not compatible (the 1-PS does not induce a filtration by subcomplexes)")]
    NotCompatible,

    #[error("crossing value N is required but absent")]
    MissingCrossing,

    #[error("weight ordering violated at chain position {position}: {left} <= {right}")]
    OrderingViolated {
        position: usize,
        left: String,
        right: String,
    },

    #[error("sum-zero constraint violated: total {0}")]
    SumZeroViolated(String),

    #[error("HN type has no blocks")]
    EmptyType,

    #[error("enumeration budget exceeded: needs {needed} subspace tuples, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("uniqueness violation: {0}")]
    NonUnique(String),

    #[error("malformed weight decomposition: {0}")]
    MalformedDecomposition(String),

    #[error("oracle discrepancy: {0}")]
    Discrepancy(String),

    #[error("block value at n is not positive: {label} evaluates to {value}")]
    NonpositiveValueAtN { label: String, value: String },

    #[error("block multiplicity is not an integer: {label} evaluates to {value}")]
    NonIntegralMultiplicity { label: String, value: String },

    #[error("{0}")]
    InvalidInput(String),
}
