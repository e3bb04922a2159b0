//! Best-first branch-and-bound over the dense simplex. A test oracle and
//! desk-scale backend, not a production MILP solver.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use model_ir::{ModelIR, Sense, SolStatus, Solution, VarKind};

use crate::error::SolverError;
use crate::outcome::{OutcomeStatus, SolveOutcome};
use crate::simplex::{LpProblem, LpResult};

const INT_TOL: f64 = 1e-6;

/// Guard rails for the micro backend. Defaults match its test-oracle role;
/// callers running real instances raise them explicitly.
#[derive(Debug, Clone, Copy)]
pub struct MicroLimits {
    pub max_binaries: usize,
    pub max_vars: usize,
    pub max_nodes: u64,
}

impl Default for MicroLimits {
    fn default() -> Self {
        Self { max_binaries: 40, max_vars: 2000, max_nodes: 2_000_000 }
    }
}

struct Node {
    /// LP bound in minimization space.
    bound: f64,
    seq: u64,
    lo: Vec<f64>,
    up: Vec<f64>,
    values: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.seq == other.seq
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap pops the max; prefer the smallest bound (best-first in the
    // minimization space) and dive into the newest node on ties.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then(self.seq.cmp(&other.seq))
    }
}

/// Exact optimum of a linear model with binaries via best-first
/// branch-and-bound; LP relaxations solved by the built-in dense simplex.
/// Branches on the most fractional binary, ties by variable index; node
/// order is reproducible.
pub fn micro_branch_and_bound(
    m: &ModelIR,
    limits: &MicroLimits,
    time_limit_s: f64,
    mip_gap: f64,
) -> Result<SolveOutcome, SolverError> {
    if !m.nonlinear.is_empty() {
        return Err(SolverError::NonlinearModel);
    }
    let n_bin = m.num_binaries();
    if n_bin > limits.max_binaries || m.num_vars() > limits.max_vars {
        return Err(SolverError::SizeGuard {
            binaries: n_bin,
            vars: m.num_vars(),
            max_binaries: limits.max_binaries,
            max_vars: limits.max_vars,
        });
    }
    let start = Instant::now();
    let deadline = time_limit_s;
    let problem = LpProblem::from_model(m);
    // minimization space: flip objectives of maximization models
    let flip = match m.objective.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let binaries: Vec<usize> = m
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(i, _)| i)
        .collect();

    let base_lo: Vec<f64> = m.vars.iter().map(|v| v.lower).collect();
    let base_up: Vec<f64> = m.vars.iter().map(|v| v.upper).collect();

    let mut nodes: u64 = 0;
    let mut heap = BinaryHeap::new();
    let mut incumbent: Option<(f64, Vec<f64>)> = None; // min-space objective
    let mut seq: u64 = 0;

    let eval = |lo: &[f64],
                    up: &[f64],
                    nodes: &mut u64|
     -> Result<Option<(f64, Vec<f64>)>, SolverError> {
        *nodes += 1;
        match problem.solve_with_bounds(Some((lo, up)))? {
            LpResult::Optimal { values, objective } => Ok(Some((flip * objective, values))),
            LpResult::Infeasible => Ok(None),
            LpResult::Unbounded => Err(SolverError::Simplex("LP relaxation unbounded".into())),
        }
    };

    match eval(&base_lo, &base_up, &mut nodes)? {
        Some((bound, values)) => {
            heap.push(Node { bound, seq, lo: base_lo, up: base_up, values });
        }
        None => return Ok(SolveOutcome::infeasible(start.elapsed().as_secs_f64())),
    }

    let mut timed_out = false;
    let mut best_open_bound = f64::NEG_INFINITY;
    while let Some(node) = heap.pop() {
        if let Some((inc, _)) = &incumbent {
            let gap_ok = node.bound >= *inc - mip_gap * inc.abs().max(1.0);
            if gap_ok {
                // everything left is at least as bad
                best_open_bound = node.bound;
                heap.clear();
                break;
            }
        }
        if start.elapsed().as_secs_f64() > deadline || nodes >= limits.max_nodes {
            best_open_bound = node.bound;
            timed_out = true;
            break;
        }

        // most fractional binary, ties by variable index
        let mut branch: Option<(usize, f64)> = None;
        for &j in &binaries {
            let v = node.values[j];
            let frac_dist = (v - v.round()).abs();
            if frac_dist > INT_TOL {
                let score = (v - 0.5).abs();
                if branch.map_or(true, |(_, s)| score < s - 1e-12) {
                    branch = Some((j, score));
                }
            }
        }

        match branch {
            None => {
                // integral point
                if incumbent.as_ref().map_or(true, |(inc, _)| node.bound < *inc - 1e-12) {
                    incumbent = Some((node.bound, node.values));
                }
            }
            Some((j, _)) => {
                for &fix in &[0.0, 1.0] {
                    let mut lo = node.lo.clone();
                    let mut up = node.up.clone();
                    lo[j] = fix;
                    up[j] = fix;
                    if let Some((bound, values)) = eval(&lo, &up, &mut nodes)? {
                        let worth = incumbent
                            .as_ref()
                            .map_or(true, |(inc, _)| bound < *inc - mip_gap * inc.abs().max(1.0));
                        if worth {
                            seq += 1;
                            heap.push(Node { bound, seq, lo, up, values });
                        }
                    }
                }
            }
        }
    }

    if !timed_out {
        best_open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    }
    let wall = start.elapsed().as_secs_f64();
    match incumbent {
        Some((obj_min, values)) => {
            let objective = flip * obj_min;
            let proven = !timed_out;
            let dual = if proven {
                objective
            } else {
                flip * best_open_bound.min(obj_min)
            };
            let status = if proven { OutcomeStatus::Optimal } else { OutcomeStatus::Feasible };
            Ok(SolveOutcome {
                status,
                solution: Some(Solution {
                    status: if proven { SolStatus::Optimal } else { SolStatus::Feasible },
                    objective,
                    values,
                }),
                objective: Some(objective),
                dual_bound: Some(dual),
                wall_time_s: wall,
                nodes: Some(nodes),
                iterations: None,
                max_violation: None,
                elastic_used: None,
            })
        }
        None if timed_out => Ok(SolveOutcome {
            status: OutcomeStatus::TimeoutNoSolution,
            solution: None,
            objective: None,
            dual_bound: Some(flip * best_open_bound),
            wall_time_s: wall,
            nodes: Some(nodes),
            iterations: None,
            max_violation: None,
            elastic_used: None,
        }),
        None => {
            let mut out = SolveOutcome::infeasible(wall);
            out.nodes = Some(nodes);
            Ok(out)
        }
    }
}
