//! Solvers: limited-memory quasi-Newton (plain and box-constrained), exact
//! rounding of relaxed selections, and the mixed-variable selection search.

mod control;
mod lbfgs;
mod mino;
mod selection;

pub use control::{ControlProblem, ControlSolution, RelaxedSolution};
pub use lbfgs::{bounded_min, quasi_newton_min, NlpOptions, NlpResult, Termination};
pub use mino::{mino_search, MinoOptions, MinoResult, TraceEntry};
pub use selection::{binomial, round_selection, Budget, BudgetMode, Selection};
