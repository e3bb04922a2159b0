//! Recovery of feasible solutions to the demand-maximization problem from
//! its MILP relaxations: the baseline integer-fixing method, neighborhood
//! search over a Hamming ball (optionally restricted to the pump activation
//! variables), iterative partition refinement, and the tie-breaking variant
//! that recovers from a second, cost-minimizing candidate.

mod config;
mod loops;
mod recover;
mod result;

pub use config::{RecoveryConfig, SubsetSelector};
pub use loops::{
    read_checkpoint, refine_loop, refine_loop_tiebreak, refine_loop_tiebreak_resumed,
};
pub use model_ir::Assignment;
pub use recover::{baseline_recover, neighborhood_recover, solve_restricted_n2, RecoveryError};
pub use result::{
    CandidateSource, Incumbent, IterationRecord, RunResult, RunState, Termination,
};
