use thiserror::Error;

use crate::tensor::Dims;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimensionMismatch(Dims, Dims),

    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("enumeration budget exceeded: {required} cases needed, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("tensor has a negative entry")]
    NegativeEntry,

    #[error("tensor does not have well-defined marginals (not in ANS)")]
    NotInAns,

    #[error("rows do not have a common sum")]
    NonConstantRowSum,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Lp(#[from] crate::lp::LpError),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
