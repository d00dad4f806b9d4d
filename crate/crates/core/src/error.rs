use thiserror::Error;

use crate::lp::LpError;

/// Which side of a Fréchet interval was crossed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSide {
    Lower,
    Upper,
}

impl std::fmt::Display for BoundSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundSide::Lower => f.write_str("lower"),
            BoundSide::Upper => f.write_str("upper"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rank {0} is too small; cyclic systems need at least two contexts")]
    RankTooSmall(usize),
    #[error("rank {rank} exceeds the supported maximum {max}")]
    RankTooLarge { rank: usize, max: usize },
    #[error("{field} = {value} is outside [0, 1]")]
    OutOfRange { field: String, value: f64 },
    #[error("context {context}: bunch product violates the {side} Fréchet bound")]
    FrechetViolation { context: usize, side: BoundSide },
    #[error("malformed system: {0}")]
    Malformed(String),
    #[error("context {0} has no trials")]
    EmptyContext(usize),
    #[error("empty vector")]
    EmptyVector,
    #[error("system is not contextual")]
    NotContextual,
    #[error("system is contextual")]
    IsContextual,
    #[error("box is degenerate (a variable is deterministic)")]
    DegenerateBox,
    #[error("point lies outside the box in coordinate {0}")]
    OutsideBox(usize),
    #[error("L_p exponent must be at least 1, got {0}")]
    BadExponent(f64),
    #[error("vertex is even; pockets form at odd vertices")]
    EvenVertex,
    #[error("Delta = {delta} is outside [{lo}, {hi}]")]
    BadDelta { delta: f64, lo: f64, hi: f64 },
    #[error("{count} variables exceed the supported maximum {max}")]
    TooManyVariables { count: usize, max: usize },
    #[error("sweep rank {0} is outside 2..=7")]
    BadRank(usize),
    #[error("{got} samples requested; at least {min} are needed")]
    SamplesTooFew { got: usize, min: usize },
    #[error("linear program: {0}")]
    Solver(#[from] LpError),
}

pub type Result<T> = std::result::Result<T, Error>;
