//! The A_K fitting problem: a numerical feasibility backend and the
//! polynomial-inequality system encoding.

pub mod solver;
pub mod system;

pub use solver::{feasibility_solve, ComponentDomain, FitProblem, SolveConfig, SolveSession, Solution, SolverStats};
pub use system::{encode_system, PolySystem, DEFAULT_T_CAP};
