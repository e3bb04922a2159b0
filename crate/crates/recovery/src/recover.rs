//! Baseline and neighborhood-search recovery of feasible solutions from
//! relaxation candidates.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use model_ir::{add_hamming_constraint, add_nogood_cut, build_n1, fix_integers, Assignment, ModelIR};
use solvers::{solve_milp, solve_nlp_fixed, BackendConfig, OutcomeStatus, SlpConfig, SolveOutcome};
use thiserror::Error;
use wdn_core::Network;

use crate::config::{RecoveryConfig, SubsetSelector};

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] model_ir::ModelError),
    #[error(transparent)]
    Relax(#[from] relaxation::RelaxError),
    #[error(transparent)]
    Solver(#[from] solvers::SolverError),
    #[error("no relaxation candidate available at level {0}")]
    NoCandidate(usize),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// Fix the integer variables to the candidate and solve the resulting NLP.
/// Returns the NLP outcome verbatim: infeasibility is the failure signal.
pub fn baseline_recover(
    net: &Network,
    candidate: &Assignment,
    slp: &SlpConfig,
) -> Result<SolveOutcome, RecoveryError> {
    let n1 = build_n1(net)?;
    baseline_recover_model(&n1, candidate, slp, None)
}

pub(crate) fn baseline_recover_model(
    n1: &ModelIR,
    candidate: &Assignment,
    slp: &SlpConfig,
    warm: Option<&BTreeMap<String, f64>>,
) -> Result<SolveOutcome, RecoveryError> {
    let fixed = fix_integers(n1, candidate)?;
    let mut seed: BTreeMap<String, f64> = warm.cloned().unwrap_or_default();
    for (name, &v) in candidate {
        seed.insert(name.clone(), if v { 1.0 } else { 0.0 });
    }
    Ok(solve_nlp_fixed(&fixed, slp, Some(&seed))?)
}

/// Shared state of one neighborhood search: the accumulated no-good cuts and
/// the relaxation model the restricted MINLP is searched through.
pub(crate) struct SearchContext<'a> {
    pub n1: &'a ModelIR,
    pub inner_l1: &'a ModelIR,
    pub backend: &'a BackendConfig,
    pub slp: &'a SlpConfig,
    pub nogood_cap: usize,
    pub deadline: Option<Instant>,
    pub nogoods: Vec<Assignment>,
}

impl SearchContext<'_> {
    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Solve the restricted MINLP `N2(candidate, h)`: candidates come from the
/// inner MILP relaxation with the Hamming row attached, each one is checked
/// by the fixed-integer NLP, and NLP-infeasible assignments are excluded by
/// no-good cuts before re-solving. A relaxation-infeasible MILP soundly
/// certifies that the restricted MINLP is infeasible at this radius.
pub fn solve_restricted_n2(
    net: &Network,
    candidate: &Assignment,
    subset: &BTreeSet<String>,
    h: usize,
    cfg: &RecoveryConfig,
    backend: &BackendConfig,
    slp: &SlpConfig,
) -> Result<SolveOutcome, RecoveryError> {
    let n1 = build_n1(net)?;
    let ps = relaxation::partition_at_level(&n1, cfg.inner_level(0))?;
    let inner_l1 = relaxation::build_l1(net, &ps)?;
    let mut ctx = SearchContext {
        n1: &n1,
        inner_l1: &inner_l1,
        backend,
        slp,
        nogood_cap: cfg.nogood_cap,
        deadline: None,
        nogoods: Vec::new(),
    };
    solve_restricted_n2_ctx(&mut ctx, candidate, subset, h)
}

pub(crate) fn solve_restricted_n2_ctx(
    ctx: &mut SearchContext<'_>,
    candidate: &Assignment,
    subset: &BTreeSet<String>,
    h: usize,
) -> Result<SolveOutcome, RecoveryError> {
    if h == 0 {
        // the Hamming row pins the subset: identical to the baseline
        return baseline_recover_model(ctx.n1, candidate, ctx.slp, None);
    }
    let start = Instant::now();
    let with_hamming = add_hamming_constraint(ctx.inner_l1, candidate, subset, h)?;
    for round in 0..ctx.nogood_cap {
        if ctx.out_of_time() {
            break;
        }
        let mut milp = with_hamming.clone();
        for ng in &ctx.nogoods {
            milp = add_nogood_cut(&milp, ng)?;
        }
        let out = solve_milp(&milp, ctx.backend)?;
        match out.status {
            OutcomeStatus::Infeasible => {
                // the MILP relaxes the restricted MINLP
                return Ok(SolveOutcome::infeasible(start.elapsed().as_secs_f64()));
            }
            OutcomeStatus::TimeoutNoSolution => {
                return Ok(SolveOutcome {
                    status: OutcomeStatus::TimeoutNoSolution,
                    solution: None,
                    objective: None,
                    dual_bound: out.dual_bound,
                    wall_time_s: start.elapsed().as_secs_f64(),
                    nodes: out.nodes,
                    iterations: Some(round as u64),
                    max_violation: None,
                    elastic_used: None,
                });
            }
            OutcomeStatus::Optimal | OutcomeStatus::Feasible => {
                let sol = out.solution.as_ref().expect("feasible MILP carries a solution");
                let assignment = model_ir::project_candidate(&milp, &sol.values, 1e-6)?;
                let warm = sol.value_map(&milp);
                let nlp = baseline_recover_model(ctx.n1, &assignment, ctx.slp, Some(&warm))?;
                if nlp.is_feasible() {
                    return Ok(nlp);
                }
                // exclude this assignment on the searched subset and retry
                let free_part: Assignment = assignment
                    .iter()
                    .filter(|(name, _)| subset.contains(*name))
                    .map(|(name, &v)| (name.clone(), v))
                    .collect();
                ctx.nogoods.push(free_part);
            }
        }
    }
    // cap or deadline exhausted without a verdict
    Ok(SolveOutcome {
        status: OutcomeStatus::TimeoutNoSolution,
        solution: None,
        objective: None,
        dual_bound: None,
        wall_time_s: start.elapsed().as_secs_f64(),
        nodes: None,
        iterations: Some(ctx.nogood_cap as u64),
        max_violation: None,
        elastic_used: None,
    })
}

/// Iteratively enlarge the neighborhood radius until a feasible solution
/// appears; returns it with the radius `h̄` that produced it. Exhausting
/// every radius of a proper subset (or running out of time or no-good
/// budget) reports failure via the outcome status.
pub fn neighborhood_recover(
    net: &Network,
    candidate: &Assignment,
    cfg: &RecoveryConfig,
    backend: &BackendConfig,
    slp: &SlpConfig,
) -> Result<(SolveOutcome, Option<usize>), RecoveryError> {
    let n1 = build_n1(net)?;
    let ps = relaxation::partition_at_level(&n1, cfg.inner_level(0))?;
    let inner_l1 = relaxation::build_l1(net, &ps)?;
    let mut ctx = SearchContext {
        n1: &n1,
        inner_l1: &inner_l1,
        backend,
        slp,
        nogood_cap: cfg.nogood_cap,
        deadline: None,
        nogoods: Vec::new(),
    };
    neighborhood_recover_ctx(&mut ctx, candidate, &cfg.subset)
}

pub(crate) fn neighborhood_recover_ctx(
    ctx: &mut SearchContext<'_>,
    candidate: &Assignment,
    subset: &SubsetSelector,
) -> Result<(SolveOutcome, Option<usize>), RecoveryError> {
    let subset = subset.resolve(ctx.n1);
    let start = Instant::now();
    let mut last = SolveOutcome::infeasible(0.0);
    for h in 0..=subset.len() {
        if ctx.out_of_time() {
            last.status = OutcomeStatus::TimeoutNoSolution;
            break;
        }
        let out = solve_restricted_n2_ctx(ctx, candidate, &subset, h)?;
        if out.is_feasible() {
            return Ok((out, Some(h)));
        }
        last = out;
    }
    last.wall_time_s = start.elapsed().as_secs_f64();
    Ok((last, None))
}
