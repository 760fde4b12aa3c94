//! Mixed-integer linear programs: a backend-neutral model representation,
//! LP-format export, and two solver backends behind the [`Solver`] trait.
//!
//! - [`HighsSolver`] wraps HiGHS and is the default for [`solve`].
//! - [`BranchAndBound`] is a small exact solver (dense simplex at the nodes)
//!   for models with at most [`BB_INTEGER_LIMIT`] integer variables. It has
//!   no external dependencies and serves as a cross-check for HiGHS.

mod branch_bound;
mod error;
mod highs_backend;
mod lp_format;
mod model;
mod simplex;
mod solution;

pub use branch_bound::{BranchAndBound, BB_INTEGER_LIMIT};
pub use error::{ModelError, SolveError};
pub use highs_backend::HighsSolver;
pub use model::{Constraint, Infeasibility, LinExpr, Model, Sense, Var, VarId, VarKind};
pub use solution::{Solution, SolveOptions, SolveStatus};

/// Anything that can solve a [`Model`].
///
/// Conforming backends return assignments satisfying every constraint to
/// `opts.feasibility_tol` and, when the status is optimal or gap-limited,
/// an objective within `opts.gap` (relative) of the optimum.
pub trait Solver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, model: &Model, opts: &SolveOptions) -> Result<Solution, SolveError>;
}

/// Solves with the default backend (HiGHS).
pub fn solve(model: &Model, opts: &SolveOptions) -> Result<Solution, SolveError> {
    HighsSolver::default().solve(model, opts)
}

/// Solves with the built-in branch-and-bound.
pub fn bb_solve(model: &Model, opts: &SolveOptions) -> Result<Solution, SolveError> {
    BranchAndBound.solve(model, opts)
}
