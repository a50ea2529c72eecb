//! Solvers for the Newton sub-problem `Hp = ∇F(y)` with `H = B̃ᵀB̃ + αI`.

mod cg;
mod fast;
mod hessian;

pub use cg::{cg, pcg};
pub use fast::{
    fast_solver_iterations, fast_subproblem_solve, fast_subproblem_solve_with, EmbeddingKind,
    FastSolverConfig, PreconditionerForm,
};
pub use hessian::{woodbury_solve, ApproxHessian};

use crate::linalg::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Cg,
    Pcg,
    Woodbury,
    FastPcg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolveReport {
    pub solution: Vector,
    pub iterations: usize,
    /// `‖A·solution − b‖` recomputed from scratch at exit.
    pub final_residual_norm: f64,
    /// Residual norm carried by the solver's own recurrence.
    pub recurrence_residual_norm: f64,
    pub method: SolveMethod,
}
