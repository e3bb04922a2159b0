//! Iterative partition refinement with neighborhood-search recovery, with
//! and without the tie-breaking second candidate.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use model_ir::{build_n1, project_candidate, ModelIR, Solution};
use relaxation::{build_l1, build_l2, initial_partition, partition_at_level, refine, PartitionSet};
use solvers::{solve_milp, BackendConfig, OutcomeStatus, SlpConfig, SolveOutcome};
use wdn_core::Network;

use crate::config::RecoveryConfig;
use crate::recover::{neighborhood_recover_ctx, RecoveryError, SearchContext};
use crate::result::{
    CandidateSource, Incumbent, IterationRecord, RunResult, RunState, Termination,
};

fn status_str(out: &SolveOutcome) -> String {
    match out.status {
        OutcomeStatus::Optimal => "optimal",
        OutcomeStatus::Feasible => "feasible",
        OutcomeStatus::Infeasible => "infeasible",
        OutcomeStatus::TimeoutNoSolution => "timeout",
    }
    .to_string()
}

/// Iterative partition refinement (no tie-breaker).
pub fn refine_loop(
    net: &Network,
    cfg: &RecoveryConfig,
    backend: &BackendConfig,
    slp: &SlpConfig,
) -> Result<RunResult, RecoveryError> {
    run_loop(net, cfg, backend, slp, false, None)
}

/// The complete algorithm: refinement, neighborhood search and the
/// embedded tie-breaking recovery from the cost-minimizing candidate.
pub fn refine_loop_tiebreak(
    net: &Network,
    cfg: &RecoveryConfig,
    backend: &BackendConfig,
    slp: &SlpConfig,
) -> Result<RunResult, RecoveryError> {
    run_loop(net, cfg, backend, slp, true, None)
}

/// Resume a tie-breaking run from a checkpoint.
pub fn refine_loop_tiebreak_resumed(
    net: &Network,
    cfg: &RecoveryConfig,
    backend: &BackendConfig,
    slp: &SlpConfig,
    state: RunState,
) -> Result<RunResult, RecoveryError> {
    run_loop(net, cfg, backend, slp, true, Some(state))
}

fn demand_values(l1: &ModelIR, sol: &Solution) -> BTreeMap<String, f64> {
    l1.vars
        .iter()
        .zip(&sol.values)
        .filter(|(v, _)| v.name.starts_with("qdem:"))
        .map(|(v, &x)| (v.name.clone(), x))
        .collect()
}

fn write_checkpoint(cfg: &RecoveryConfig, state: &RunState) -> Result<(), RecoveryError> {
    if let Some(path) = &cfg.checkpoint_path {
        let text = serde_json::to_string_pretty(state)
            .map_err(|e| RecoveryError::Checkpoint(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| RecoveryError::Checkpoint(e.to_string()))?;
    }
    Ok(())
}

pub fn read_checkpoint(path: &std::path::Path) -> Result<RunState, RecoveryError> {
    let text = std::fs::read_to_string(path).map_err(|e| RecoveryError::Checkpoint(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| RecoveryError::Checkpoint(e.to_string()))
}

fn run_loop(
    net: &Network,
    cfg: &RecoveryConfig,
    backend: &BackendConfig,
    slp: &SlpConfig,
    tiebreak: bool,
    resume: Option<RunState>,
) -> Result<RunResult, RecoveryError> {
    cfg.validate().map_err(RecoveryError::InvalidConfig)?;
    let start = Instant::now();
    let deadline = cfg.global_deadline_s.map(|s| start + Duration::from_secs_f64(s));
    let n1 = build_n1(net)?;

    let mut ps = initial_partition(&n1)?;
    let mut incumbent: Option<Incumbent> = None;
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut best_ub: Option<f64> = None;
    let mut k_start = 1usize;
    if let Some(state) = resume {
        ps = PartitionSet::from_json(&state.partitions.to_string())?;
        incumbent = state.incumbent;
        records = state.records;
        best_ub = state.best_ub;
        k_start = state.k_done + 1;
    }

    let mut termination = Termination::KMaxReached;
    let mut certified = false;

    for k in k_start..=cfg.k_max {
        let remaining = deadline.map(|d| d.saturating_duration_since(Instant::now()).as_secs_f64());
        if remaining.is_some_and(|r| r <= 0.0) {
            termination = Termination::DeadlineReached;
            break;
        }
        let call_limit = remaining.map_or(cfg.tmax_per_call_s, |r| r.min(cfg.tmax_per_call_s));
        let backend_call = backend.clone().with_time_limit(call_limit);

        ps = refine(&ps);
        let mut rec = IterationRecord::new(k);

        let l1 = build_l1(net, &ps)?;
        let t0 = Instant::now();
        let out_l1 = solve_milp(&l1, &backend_call)?;
        rec.t_l1_s = t0.elapsed().as_secs_f64();
        rec.t_lp_s = rec.t_l1_s;
        rec.l1_status = status_str(&out_l1);

        let Some(l1_sol) = out_l1.solution.clone() else {
            // no candidate at this level: record the attempt and move on
            records.push(rec);
            let state = RunState {
                k_done: k,
                partitions: serde_json::from_str(&ps.to_json()).expect("partition json"),
                incumbent: incumbent.clone(),
                records: records.clone(),
                best_ub,
            };
            write_checkpoint(cfg, &state)?;
            continue;
        };
        // A timeout incumbent still carries a rigorous dual bound when the
        // backend reports one; otherwise the bound is advisory only.
        let (ub, rigorous) = match out_l1.status {
            OutcomeStatus::Optimal => (out_l1.objective.unwrap(), true),
            _ => match out_l1.dual_bound {
                Some(d) => (d, true),
                None => (out_l1.objective.unwrap(), false),
            },
        };
        rec.ub_l1 = Some(ub);
        rec.ub_rigorous = rigorous;
        if rigorous {
            best_ub = Some(best_ub.map_or(ub, |b| b.min(ub)));
        }

        let inner_ps = partition_at_level(&n1, cfg.inner_level(k))?;
        let inner_l1 = build_l1(net, &inner_ps)?;
        let mut ctx = SearchContext {
            n1: &n1,
            inner_l1: &inner_l1,
            backend: &backend_call,
            slp,
            nogood_cap: cfg.nogood_cap,
            deadline,
            nogoods: Vec::new(),
        };

        let candidate1 = project_candidate(&l1, &l1_sol.values, 1e-6)?;
        let t0 = Instant::now();
        let (out1, h1) = neighborhood_recover_ctx(&mut ctx, &candidate1, &cfg.subset)?;
        rec.t_rec1_s = t0.elapsed().as_secs_f64();
        rec.rec1_status = status_str(&out1);
        if out1.is_feasible() {
            rec.t_rec_s = rec.t_rec1_s;
            rec.h_bar = h1;
            rec.recovered_objective = out1.objective;
            rec.candidate_source = Some(CandidateSource::L1);
            maybe_update_incumbent(&mut incumbent, &n1, &out1, CandidateSource::L1, k, h1);
        }

        if tiebreak {
            let demands = demand_values(&l1, &l1_sol);
            let l2 = build_l2(net, &ps, &demands)?;
            let t0 = Instant::now();
            match solve_milp(&l2, &backend_call) {
                Ok(out_l2) => {
                    rec.t_l2_s = t0.elapsed().as_secs_f64();
                    rec.l2_status = status_str(&out_l2);
                    if let Some(l2_sol) = out_l2.solution {
                        let candidate2 = project_candidate(&l2, &l2_sol.values, 1e-6)?;
                        let t0 = Instant::now();
                        let (out2, h2) = neighborhood_recover_ctx(&mut ctx, &candidate2, &cfg.subset)?;
                        rec.t_rec2_s = t0.elapsed().as_secs_f64();
                        rec.rec2_status = status_str(&out2);
                        if out2.is_feasible() {
                            let leg1 = out1.is_feasible().then_some(out1.objective).flatten();
                            let better_leg = leg1.map_or(true, |o1| out2.objective.unwrap() > o1);
                            if better_leg {
                                rec.recovered_objective = out2.objective;
                                rec.candidate_source = Some(CandidateSource::L2);
                                rec.h_bar = h2;
                            }
                            let improved = maybe_update_incumbent(
                                &mut incumbent,
                                &n1,
                                &out2,
                                CandidateSource::L2,
                                k,
                                h2,
                            );
                            if improved {
                                rec.t_lp_s = rec.t_l1_s + rec.t_l2_s;
                                rec.t_rec_s = rec.t_rec2_s;
                            }
                        }
                    }
                }
                Err(e) => {
                    // the tie-breaking leg degrades gracefully
                    rec.t_l2_s = t0.elapsed().as_secs_f64();
                    rec.l2_status = format!("error: {e}");
                }
            }
        }

        if cfg.certify {
            if let (Some(inc), Some(bub)) = (&incumbent, best_ub) {
                if (bub - inc.objective).abs() <= cfg.eps_opt || bub <= inc.objective + cfg.eps_opt {
                    certified = true;
                }
            }
        }

        records.push(rec);
        let state = RunState {
            k_done: k,
            partitions: serde_json::from_str(&ps.to_json()).expect("partition json"),
            incumbent: incumbent.clone(),
            records: records.clone(),
            best_ub,
        };
        write_checkpoint(cfg, &state)?;

        if certified {
            termination = Termination::Certified;
            break;
        }
    }

    Ok(RunResult {
        incumbent,
        certified,
        records,
        termination,
        best_ub,
        total_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Store the solution if it strictly improves the incumbent; ties keep the
/// first-found solution so runs stay reproducible.
fn maybe_update_incumbent(
    incumbent: &mut Option<Incumbent>,
    n1: &ModelIR,
    out: &SolveOutcome,
    source: CandidateSource,
    k: usize,
    h: Option<usize>,
) -> bool {
    let Some(obj) = out.objective else { return false };
    let improves = incumbent.as_ref().map_or(true, |inc| obj > inc.objective);
    if improves {
        let sol = out.solution.as_ref().expect("feasible outcome carries a solution");
        *incumbent = Some(Incumbent {
            objective: obj,
            values: sol.value_map(n1),
            source,
            found_at_k: k,
            h_bar: h.unwrap_or(0),
        });
    }
    improves
}
