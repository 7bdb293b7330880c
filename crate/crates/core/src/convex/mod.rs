//! Convex machinery: conic backend, Hermitian variables, SCA surrogates and
//! the subproblems solved by every scheme.

pub mod conic;
pub mod hermitian;
pub mod subproblem;
pub mod surrogate;

pub use conic::{ConicProgram, LinExpr, SolveStatus, SOLVER_EPS, SOLVER_FALLBACK_EPS};
pub use subproblem::{
    build_init_subproblem, build_inner_subproblem, build_inner_subproblem_weighted, build_power_subproblem,
    build_zf_power_subproblem, recover_rank_one, solve, surrogate_objective, taylor_gap, update_aux,
    ConvexSubproblem, SolveOutcome, SubproblemKind,
};
pub use surrogate::{EigTangent, ExpTangent};
