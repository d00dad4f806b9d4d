//! Contextuality and noncontextuality measures for cyclic systems of binary
//! random variables, with a linear-programming oracle, the geometry of the
//! noncontextuality polytope, and general (noncyclic) systems.

pub mod error;
pub mod general;
pub mod lemmas;
pub mod lp;
pub mod measures;
pub mod polytope;
pub mod sampling;
pub mod sign;
pub mod sweep;
pub mod system;

pub use error::{Error, Result};
pub use measures::{analyze, MeasureReport, Units};
pub use system::{CyclicSystem, ExpectationVectors, TrialCounts, ValidatedCyclicSystem};
