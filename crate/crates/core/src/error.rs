use thiserror::Error;

use crate::rational::Q;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),

    #[error("p and s must differ (both are {0})")]
    EqualPrimes(u32),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u32, u32),

    #[error("cells overlap: {0}")]
    OverlappingCells(String),

    #[error("map is not invertible")]
    NotInvertible,

    #[error("density vanishes at coordinate {coord}, point {point}; cocycle undefined")]
    UndefinedCocycle { coord: usize, point: String },

    #[error("geometric tail diverges: |{ratio}|_s * |T|_s^{dir} >= 1")]
    Divergent { ratio: Q, dir: i8 },

    #[error("absolute continuity fails on {0}")]
    NotAbsolutelyContinuous(String),

    #[error("beta factor {0} lies outside (0, 1]")]
    BetaOutOfRange(String),

    #[error("chain is not decreasing at index {0}")]
    ChainNotDecreasing(usize),

    #[error("chain has nonempty intersection")]
    ChainNotShrinking,

    #[error("theta table incomplete: missing frequency {0}")]
    IncompleteTable(String),

    #[error("inverse transform is not rational at cell {0}")]
    NonRationalInverse(String),

    #[error("shift {0} exceeds the admissible radius")]
    ShiftTooLarge(String),

    #[error("factor levels must be nondecreasing")]
    LevelsNotMonotone,

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),
}
