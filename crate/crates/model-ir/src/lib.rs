//! Solver-agnostic optimization model representation.
//!
//! [`ModelIR`] carries variables, linear constraints, the two nonlinear term
//! kinds the hydraulics need (signed power for pipe head loss, gated concave
//! quadratic for pump head gain) and a linear objective. [`build_n1`] turns a
//! network into the demand-maximization model; [`fix_integers`],
//! [`add_hamming_constraint`] and [`add_nogood_cut`] derive the restricted
//! models the recovery algorithms work with. The linear subset round-trips
//! through MPS for external solvers.

mod build;
mod ir;
mod mps;
mod solfile;

pub use build::{add_hamming_constraint, add_nogood_cut, build_n1, fix_integers};
pub use ir::{
    project_candidate, Assignment, Cmp, LinConstraint, ModelError, ModelIR, NonlinearTerm,
    Objective, Provenance, Sense, SolStatus, Solution, TermKind, Var, VarId, VarKind,
};
pub use mps::{read_mps, write_mps, MpsError, NameTable};
pub use solfile::{read_solution, write_solution, SolFileError};
