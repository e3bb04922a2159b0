//! Sequential linear programming for the fixed-integer NLP restriction.
//!
//! Each iteration linearizes the nonlinear equalities at the current
//! iterate, solves an LP restricted to a trust-region box around the base
//! variables, and accepts or rejects the step on a (violation, objective)
//! filter. Elastic slacks with an escalating penalty provide feasibility
//! restoration; convergence with positive slack at the penalty ceiling is
//! the infeasibility certificate.

use std::collections::BTreeMap;
use std::time::Instant;

use model_ir::{Cmp, ModelIR, Provenance, Sense, SolStatus, Solution, TermKind, VarKind};

use crate::error::SolverError;
use crate::outcome::{OutcomeStatus, SolveOutcome};
use crate::simplex::{LpProblem, LpResult};

#[derive(Debug, Clone)]
pub struct SlpConfig {
    pub max_iterations: usize,
    pub trust_initial: f64,
    pub trust_min: f64,
    pub trust_max: f64,
    /// Max absolute violation of a nonlinear relation for a point to count
    /// as feasible.
    pub violation_tol: f64,
    pub step_tol: f64,
    pub penalty_initial: f64,
    pub penalty_growth: f64,
    pub penalty_max: f64,
    pub time_limit_s: f64,
}

impl Default for SlpConfig {
    fn default() -> Self {
        Self {
            max_iterations: 300,
            trust_initial: 1.0,
            trust_min: 1e-9,
            trust_max: 1e3,
            violation_tol: 1e-7,
            step_tol: 1e-9,
            penalty_initial: 1e2,
            penalty_growth: 10.0,
            penalty_max: 1e8,
            time_limit_s: 3000.0,
        }
    }
}

fn violation(m: &ModelIR, x: &[f64]) -> f64 {
    let mut v: f64 = 0.0;
    for term in &m.nonlinear {
        let d = match term.kind {
            TermKind::SignedPower { base, out, exponent, scale } => {
                x[out.0] - scale * x[base.0].max(0.0).powf(exponent)
            }
            TermKind::Quadratic { q, z, out, alpha, beta, gamma } => {
                x[out.0] - (alpha * x[q.0] * x[q.0] + beta * x[q.0] + gamma * x[z.0])
            }
        };
        v = v.max(d.abs());
    }
    v
}

/// Build the LP linearization of `m` at iterate `x` with elastic slacks and
/// a trust-region box of radius `delta` on the nonlinear base variables.
fn build_lp(m: &ModelIR, x: &[f64], delta: f64, penalty: f64) -> ModelIR {
    let mut lp = ModelIR::new("slp-lp", m.objective.sense, Provenance::N1Fixed);
    // same variables, trust box intersected on base vars
    let mut lo: Vec<f64> = m.vars.iter().map(|v| v.lower).collect();
    let mut hi: Vec<f64> = m.vars.iter().map(|v| v.upper).collect();
    if delta.is_finite() {
        for term in &m.nonlinear {
            let b = term.base_var().0;
            lo[b] = lo[b].max(x[b] - delta);
            hi[b] = hi[b].min(x[b] + delta);
        }
    }
    for (i, v) in m.vars.iter().enumerate() {
        lp.add_var(v.name.clone(), v.kind, lo[i], hi[i]);
    }
    for c in &m.constraints {
        lp.add_constraint(c.name.clone(), c.terms.clone(), c.cmp, c.rhs);
    }
    lp.objective.terms = m.objective.terms.clone();
    let slack_sign = match m.objective.sense {
        Sense::Maximize => -penalty,
        Sense::Minimize => penalty,
    };
    for term in &m.nonlinear {
        let sp = lp.add_var(format!("slp+:{}", term.id), VarKind::Continuous, 0.0, f64::INFINITY);
        let sm = lp.add_var(format!("slp-:{}", term.id), VarKind::Continuous, 0.0, f64::INFINITY);
        lp.objective.terms.push((sp, slack_sign));
        lp.objective.terms.push((sm, slack_sign));
        match term.kind {
            TermKind::SignedPower { base, out, exponent, scale } => {
                let b = x[base.0].max(0.0);
                let f = scale * b.powf(exponent);
                let fp = if b == 0.0 { 0.0 } else { scale * exponent * b.powf(exponent - 1.0) };
                lp.add_constraint(
                    format!("lin:{}", term.id),
                    vec![(out, 1.0), (base, -fp), (sp, 1.0), (sm, -1.0)],
                    Cmp::Eq,
                    f - fp * b,
                );
            }
            TermKind::Quadratic { q, z, out, alpha, beta, gamma } => {
                let qk = x[q.0];
                lp.add_constraint(
                    format!("lin:{}", term.id),
                    vec![
                        (out, 1.0),
                        (q, -(2.0 * alpha * qk + beta)),
                        (z, -gamma),
                        (sp, 1.0),
                        (sm, -1.0),
                    ],
                    Cmp::Eq,
                    -alpha * qk * qk,
                );
            }
        }
    }
    lp
}

/// Solve the NLP restriction of a model whose binaries are all fixed.
/// `warm` seeds the initial iterate by variable name; missing values start
/// at the midpoint of their bounds.
pub fn solve_nlp_fixed(
    m: &ModelIR,
    cfg: &SlpConfig,
    warm: Option<&BTreeMap<String, f64>>,
) -> Result<SolveOutcome, SolverError> {
    for id in m.binary_ids() {
        let v = m.var(id);
        if v.lower != v.upper {
            return Err(SolverError::UnfixedBinary(v.name.clone()));
        }
    }
    let start = Instant::now();
    let n = m.num_vars();

    let mut x: Vec<f64> = m
        .vars
        .iter()
        .map(|v| {
            let seed = warm.and_then(|w| w.get(&v.name).copied()).unwrap_or_else(|| {
                if v.lower.is_finite() && v.upper.is_finite() {
                    0.5 * (v.lower + v.upper)
                } else if v.lower.is_finite() {
                    v.lower
                } else if v.upper.is_finite() {
                    v.upper
                } else {
                    0.0
                }
            });
            seed.clamp(v.lower, v.upper)
        })
        .collect();

    let mut delta = cfg.trust_initial;
    let mut penalty = cfg.penalty_initial;
    let mut v_cur = violation(m, &x);
    let mut obj_cur = m.objective_value(&x);
    let better = |a: f64, b: f64| match m.objective.sense {
        Sense::Maximize => a > b,
        Sense::Minimize => a < b,
    };

    let mut best_feasible: Option<(Vec<f64>, f64, f64)> = None; // x, obj, viol
    let mut iterations: u64 = 0;
    let mut last_slack = 0.0;
    let mut stall = 0usize;

    let finish = |status: OutcomeStatus,
                  x: Vec<f64>,
                  obj: f64,
                  viol: f64,
                  iterations: u64,
                  elastic: bool,
                  start: Instant| SolveOutcome {
        status,
        solution: matches!(status, OutcomeStatus::Optimal | OutcomeStatus::Feasible).then(|| Solution {
            status: SolStatus::Feasible,
            objective: obj,
            values: x,
        }),
        objective: matches!(status, OutcomeStatus::Optimal | OutcomeStatus::Feasible).then_some(obj),
        dual_bound: None,
        wall_time_s: start.elapsed().as_secs_f64(),
        nodes: None,
        iterations: Some(iterations),
        max_violation: Some(viol),
        elastic_used: Some(elastic),
    };

    while iterations < cfg.max_iterations as u64 {
        iterations += 1;
        if start.elapsed().as_secs_f64() > cfg.time_limit_s {
            break;
        }
        let lp_model = build_lp(m, &x, delta, penalty);
        let lp = LpProblem::from_model(&lp_model);
        let result = lp.solve().map_err(|e| SolverError::SlpSubproblem {
            iteration: iterations as usize,
            message: format!("{e}; iterate: {:?}", &x[..x.len().min(8)]),
        })?;
        let values = match result {
            LpResult::Optimal { values, .. } => values,
            LpResult::Infeasible => {
                if delta.is_finite() {
                    // the box may exclude the linear polytope at a cold start
                    delta = f64::INFINITY;
                    continue;
                }
                return Ok(SolveOutcome::infeasible(start.elapsed().as_secs_f64()));
            }
            LpResult::Unbounded => {
                return Err(SolverError::SlpSubproblem {
                    iteration: iterations as usize,
                    message: "elastic LP unbounded".into(),
                })
            }
        };
        if !delta.is_finite() {
            delta = cfg.trust_initial;
        }

        let x_new = values[..n].to_vec();
        let slack_sum: f64 = values[n..].iter().sum();
        let v_new = violation(m, &x_new);
        let obj_new = m.objective_value(&x_new);
        let step = x_new
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);

        let improves_violation = v_new < v_cur - 1e-12;
        let holds_violation = v_new <= v_cur + cfg.violation_tol;
        let improves_objective = better(obj_new, obj_cur) || (obj_new - obj_cur).abs() <= 1e-12;
        let accept = improves_violation || (holds_violation && improves_objective);

        if accept {
            let obj_moved = (obj_new - obj_cur).abs() > 1e-10 * obj_new.abs().max(1.0);
            let v_prev = v_cur;
            x = x_new;
            v_cur = v_new;
            obj_cur = obj_new;
            last_slack = slack_sum;
            if v_cur <= cfg.violation_tol {
                let replace = best_feasible
                    .as_ref()
                    .map_or(true, |(_, best_obj, _)| better(obj_cur, *best_obj));
                if replace {
                    best_feasible = Some((x.clone(), obj_cur, v_cur));
                }
            }
            if v_new <= 0.1 * v_prev.max(1e-16) || step >= 0.9 * delta {
                delta = (2.0 * delta).min(cfg.trust_max);
            }
            stall = if obj_moved || step > cfg.step_tol { 0 } else { stall + 1 };
            if v_cur <= cfg.violation_tol && (step <= cfg.step_tol || stall >= 2) {
                let (bx, bobj, bviol) = best_feasible.clone().expect("feasible point recorded");
                return Ok(finish(
                    OutcomeStatus::Feasible,
                    bx,
                    bobj,
                    bviol,
                    iterations,
                    last_slack > cfg.violation_tol,
                    start,
                ));
            }
            if v_cur > cfg.violation_tol && stall >= 2 {
                // stagnant with violation: escalate the restoration penalty,
                // and call the model infeasible once the ceiling is reached
                if penalty < cfg.penalty_max {
                    penalty = (penalty * cfg.penalty_growth).min(cfg.penalty_max);
                    delta = cfg.trust_initial;
                    stall = 0;
                } else {
                    return Ok(SolveOutcome {
                        max_violation: Some(v_cur),
                        iterations: Some(iterations),
                        elastic_used: Some(true),
                        ..SolveOutcome::infeasible(start.elapsed().as_secs_f64())
                    });
                }
            }
        } else {
            delta *= 0.5;
            stall = 0;
            if delta < cfg.trust_min {
                if v_cur <= cfg.violation_tol {
                    if let Some((bx, bobj, bviol)) = best_feasible.clone() {
                        return Ok(finish(
                            OutcomeStatus::Feasible,
                            bx,
                            bobj,
                            bviol,
                            iterations,
                            last_slack > cfg.violation_tol,
                            start,
                        ));
                    }
                }
                if penalty < cfg.penalty_max {
                    penalty = (penalty * cfg.penalty_growth).min(cfg.penalty_max);
                    delta = cfg.trust_initial;
                } else {
                    // converged with violation at the penalty ceiling
                    return Ok(SolveOutcome {
                        max_violation: Some(v_cur),
                        iterations: Some(iterations),
                        elastic_used: Some(true),
                        ..SolveOutcome::infeasible(start.elapsed().as_secs_f64())
                    });
                }
            }
        }
    }

    // iteration or time budget exhausted
    if let Some((bx, bobj, bviol)) = best_feasible {
        return Ok(finish(
            OutcomeStatus::Feasible,
            bx,
            bobj,
            bviol,
            iterations,
            last_slack > cfg.violation_tol,
            start,
        ));
    }
    Ok(SolveOutcome {
        status: OutcomeStatus::TimeoutNoSolution,
        solution: None,
        objective: None,
        dual_bound: None,
        wall_time_s: start.elapsed().as_secs_f64(),
        nodes: None,
        iterations: Some(iterations),
        max_violation: Some(v_cur),
        elastic_used: Some(last_slack > cfg.violation_tol),
    })
}
