use std::collections::BTreeMap;

use model_ir::{Cmp, ModelIR, Provenance, Sense, TermKind, VarKind};
use solvers::*;

/// max q subject to out = q^1.852, out <= 2. Closed form: q* = 2^(1/1.852).
fn power_cap_model() -> ModelIR {
    let mut m = ModelIR::new("power-cap", Sense::Maximize, Provenance::N1Fixed);
    let q = m.add_var("q+:P:0", VarKind::Continuous, 0.0, 4.0);
    let out = m.add_var("dh+:P:0", VarKind::Continuous, 0.0, 2.0);
    m.objective.terms.push((q, 1.0));
    m.nonlinear.push(model_ir::NonlinearTerm {
        id: "hw+:P:0".into(),
        group: "hw+:P".into(),
        kind: TermKind::SignedPower { base: q, out, exponent: 1.852, scale: 1.0 },
        dom_lo: 0.0,
        dom_hi: 4.0,
    });
    m
}

#[test]
fn power_cap_reaches_closed_form_optimum() {
    let m = power_cap_model();
    let out = solve_nlp_fixed(&m, &SlpConfig::default(), None).unwrap();
    assert_eq!(out.status, OutcomeStatus::Feasible);
    let want = 2.0f64.powf(1.0 / 1.852);
    let got = out.objective.unwrap();
    assert!((got - want).abs() < 1e-6, "got {got}, want {want}");
    assert!(out.max_violation.unwrap() <= 1e-7);
}

/// Quadratic gain pinned by an equality through a box:
/// g = -q^2 + 4 (z fixed on), with g = 3 forced -> q = 1, objective max q.
fn quad_pin_model() -> ModelIR {
    let mut m = ModelIR::new("quad-pin", Sense::Maximize, Provenance::N1Fixed);
    let q = m.add_var("qpu:PU:0", VarKind::Continuous, 0.0, 2.0);
    let z = m.add_var("z:PU:0", VarKind::Binary, 1.0, 1.0);
    let g = m.add_var("g:PU:0", VarKind::Continuous, 0.0, 10.0);
    m.objective.terms.push((q, 1.0));
    m.add_constraint("pin", vec![(g, 1.0)], Cmp::Eq, 3.0);
    m.nonlinear.push(model_ir::NonlinearTerm {
        id: "hg:PU:0".into(),
        group: "hg:PU".into(),
        kind: TermKind::Quadratic { q, z, out: g, alpha: -1.0, beta: 0.0, gamma: 4.0 },
        dom_lo: 0.1,
        dom_hi: 2.0,
    });
    m
}

#[test]
fn quadratic_equality_root_found() {
    let m = quad_pin_model();
    let out = solve_nlp_fixed(&m, &SlpConfig::default(), None).unwrap();
    assert_eq!(out.status, OutcomeStatus::Feasible);
    let got = out.objective.unwrap();
    assert!((got - 1.0).abs() < 1e-6, "got {got}");
}

#[test]
fn unfixed_binary_rejected() {
    let mut m = power_cap_model();
    m.add_var("z:PU:0", VarKind::Binary, 0.0, 1.0);
    assert!(matches!(
        solve_nlp_fixed(&m, &SlpConfig::default(), None),
        Err(SolverError::UnfixedBinary(_))
    ));
}

#[test]
fn linear_conflict_is_infeasible() {
    // q >= 1 and q <= 0.5 conflict once the activation is pinned on
    let mut m = ModelIR::new("conflict", Sense::Maximize, Provenance::N1Fixed);
    let q = m.add_var("qpu:PU:0", VarKind::Continuous, 0.0, 2.0);
    m.objective.terms.push((q, 1.0));
    m.add_constraint("on-lb", vec![(q, 1.0)], Cmp::Ge, 1.0);
    m.add_constraint("cap", vec![(q, 1.0)], Cmp::Le, 0.5);
    let out = solve_nlp_fixed(&m, &SlpConfig::default(), None).unwrap();
    assert_eq!(out.status, OutcomeStatus::Infeasible);
}

#[test]
fn nonlinear_conflict_is_infeasible() {
    // out = q^2 (alpha<0 flipped: use signed power), out <= 0.5, q >= 1
    let mut m = ModelIR::new("nl-conflict", Sense::Maximize, Provenance::N1Fixed);
    let q = m.add_var("q+:P:0", VarKind::Continuous, 1.0, 2.0);
    let out = m.add_var("dh+:P:0", VarKind::Continuous, 0.0, 0.5);
    m.objective.terms.push((q, 1.0));
    m.nonlinear.push(model_ir::NonlinearTerm {
        id: "hw+:P:0".into(),
        group: "hw+:P".into(),
        kind: TermKind::SignedPower { base: q, out, exponent: 1.852, scale: 1.0 },
        dom_lo: 1.0,
        dom_hi: 2.0,
    });
    let out = solve_nlp_fixed(&m, &SlpConfig::default(), None).unwrap();
    assert_eq!(out.status, OutcomeStatus::Infeasible);
}

#[test]
fn warm_start_at_optimum_converges_immediately() {
    let m = power_cap_model();
    let qstar = 2.0f64.powf(1.0 / 1.852);
    let mut warm = BTreeMap::new();
    warm.insert("q+:P:0".to_string(), qstar);
    warm.insert("dh+:P:0".to_string(), 2.0);
    let out = solve_nlp_fixed(&m, &SlpConfig::default(), Some(&warm)).unwrap();
    assert_eq!(out.status, OutcomeStatus::Feasible);
    assert!(out.iterations.unwrap() <= 2, "iterations = {:?}", out.iterations);
    assert_eq!(out.elastic_used, Some(false));
    assert!((out.objective.unwrap() - qstar).abs() < 1e-8);
}
