//! Linear programming: a self-contained simplex solver, the incidence-matrix
//! construction for cyclic systems, and the LP routes to every measure.

mod builder;
pub mod distance;
pub mod incidence;
pub mod oracle;
mod scalar;
pub mod simplex;

pub use builder::{LpBuilder, Relation};
pub use incidence::{build_incidence_cyclic, IncidenceMatrix, RowBlock, RowLabel, MAX_CYCLIC_RANK};
pub use scalar::Scalar;
pub use simplex::{
    solve, solve_with, Arithmetic, LinearProgram, LpSolution, LpStatus, PivotRule, Sense,
    SolverOptions,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("unbounded objective")]
    Unbounded,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}
