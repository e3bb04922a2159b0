//! Solver backends: a dense-simplex micro branch-and-bound used as a test
//! oracle and desk-scale MILP path, an external-process backend speaking
//! MPS, and a trust-region SLP solver for the fixed-integer NLPs.

mod backend;
mod bnb;
mod error;
mod outcome;
mod simplex;
mod slp;

pub use backend::{solve_milp, BackendConfig, BackendKind, ExternalSolver, SOLVER_PATH_ENV};
pub use bnb::{micro_branch_and_bound, MicroLimits};
pub use error::SolverError;
pub use outcome::{OutcomeStatus, SolveOutcome};
pub use simplex::{LpProblem, LpResult, SimplexError};
pub use slp::{solve_nlp_fixed, SlpConfig};
