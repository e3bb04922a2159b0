use std::collections::BTreeMap;
use std::path::PathBuf;

use validate_report::*;
use wdn_core::Network;

fn instance(name: &str) -> Network {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name);
    let text = std::fs::read_to_string(path).unwrap();
    ingest_io::parse_native(&text).unwrap()
}

#[test]
fn brute_point_passes_oracle() {
    let net = instance("micro.json");
    let (obj, values) = brute_force_optimum(&net, 1e-3).unwrap().expect("micro is feasible");
    assert!((obj - 1.0).abs() < 1e-9, "micro optimum is the full demand, got {obj}");
    let report = check_feasibility(&net, &values, &OracleTolerance::default()).unwrap();
    assert!(report.is_feasible(), "violations: {:?}", report.violations);
}

#[test]
fn brute_cross_checked_by_coarser_grid() {
    let net = instance("micro.json");
    let (fine, _) = brute_force_optimum(&net, 1e-3).unwrap().unwrap();
    let (coarse, _) = brute_force_optimum(&net, 1e-2).unwrap().unwrap();
    assert!((fine - coarse).abs() < 1e-3, "{fine} vs {coarse}");
}

#[test]
fn brute_tight_matches_closed_form() {
    let net = instance("micro-tight.json");
    let (obj, values) = brute_force_optimum(&net, 1e-4).unwrap().unwrap();
    let want = 10.0f64.powf(1.0 / 1.852);
    assert!((obj - want).abs() < 1e-3, "got {obj}, want {want}");
    let report = check_feasibility(&net, &values, &OracleTolerance::default()).unwrap();
    assert!(report.is_feasible(), "violations: {:?}", report.violations);
}

#[test]
fn brute_trap_schedules() {
    let net = instance("micro-trap.json");
    let table = enumerate_schedules(&net, 1e-3).unwrap();
    assert_eq!(table.len(), 16); // (1 pipe + 1 pump) * 2 time points
    // pump on at t=0 is hydraulically impossible; off at t=0 reaches 0.5
    let mut best_off = f64::NEG_INFINITY;
    for (schedule, obj) in &table {
        if schedule["z:PU1:0"] {
            assert!(obj.is_none(), "pump-on-at-t0 schedule must be infeasible: {schedule:?}");
        } else if let Some(o) = obj {
            best_off = best_off.max(*o);
        }
    }
    assert!((best_off - 0.5).abs() < 1e-6, "trap optimum 0.5, got {best_off}");
}

#[test]
fn zero_demands_zero_objective() {
    let mut net = instance("micro.json");
    for d in net.demands.iter_mut() {
        d.max_demand = vec![0.0, 0.0];
    }
    let (obj, _) = brute_force_optimum(&net, 1e-3).unwrap().expect("all-off schedule works");
    assert_eq!(obj, 0.0);
}

#[test]
fn infeasible_by_construction_finds_nothing() {
    // tank initial level pins the junction head above its upper bound at t=0
    let mut net = instance("micro.json");
    net.junctions[2].head_min = 11.0;
    net.junctions[2].head_max = 11.5; // tank head = 10 + 2 = 12 > 11.5
    assert!(brute_force_optimum(&net, 1e-2).unwrap().is_none());
}

#[test]
fn size_guard() {
    let mut net = instance("micro.json");
    net.time.num_points = 5;
    assert!(matches!(brute_force_optimum(&net, 1e-2), Err(BruteError::SizeGuard { .. })));
}

#[test]
fn unsupported_topology_reported() {
    let mut net = instance("micro.json");
    net.reservoirs.clear();
    assert!(matches!(brute_force_optimum(&net, 1e-2), Err(BruteError::UnsupportedTopology(_))));
}

#[test]
fn perturbed_tank_volume_flags_update_family() {
    let net = instance("micro.json");
    let (_, mut values) = brute_force_optimum(&net, 1e-3).unwrap().unwrap();
    *values.get_mut("vol:T1:1").unwrap() += 1.0;
    let report = check_feasibility(&net, &values, &OracleTolerance::default()).unwrap();
    let families = report.families();
    assert!(families.contains("tank-volume-update"), "{families:?}");
    // the coupled head equation breaks too, nothing else
    assert!(families.is_subset(&["tank-volume-update", "tank-volume-head"].into()), "{families:?}");
}

#[test]
fn direction_gating_fault_flagged() {
    let net = instance("micro.json");
    let (_, mut values) = brute_force_optimum(&net, 1e-3).unwrap().unwrap();
    // claim reverse flow while the direction bit says forward
    values.insert("y:P1:0".into(), 1.0);
    values.insert("q-:P1:0".into(), 0.3);
    let report = check_feasibility(&net, &values, &OracleTolerance::default()).unwrap();
    let families = report.families();
    assert!(families.contains("pipe-flow-gate"), "{families:?}");
}

#[test]
fn missing_value_is_an_error() {
    let net = instance("micro.json");
    let (_, mut values) = brute_force_optimum(&net, 1e-3).unwrap().unwrap();
    values.remove("head:J2:0");
    assert!(matches!(
        check_feasibility(&net, &values, &OracleTolerance::default()),
        Err(OracleError::MissingValue(tag)) if tag == "head:J2:0"
    ));
}

/// The oracle and the model IR must flag the same families on random value
/// maps. The comparison runs over the row-backed families (bound-only
/// families have no IR row to compare against).
#[test]
fn oracle_agrees_with_model_rows_on_random_maps() {
    use rand::{Rng, SeedableRng};
    let net = instance("micro.json");
    let m = model_ir::build_n1(&net).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20240817);

    let family_of_row = |name: &str| -> Option<&'static str> {
        let fam = name.split(':').next().unwrap();
        Some(match fam {
            "flowsplit" => "pipe-flow-split",
            "qgate+ub" | "qgate+lb" | "qgate-ub" | "qgate-lb" => "pipe-flow-gate",
            "dhgate+" | "dhgate-" => "pipe-headdiff-gate",
            "headlink" => "pipe-head-link",
            "pugate-lb" | "pugate-ub" => "pump-flow-gate",
            "puhead-ub" | "puhead-lb" => "pump-head-link",
            "pupower" => "pump-power",
            "tkhead" => "tank-volume-head",
            "tkinit" => "tank-initial",
            "tkupdate" => "tank-volume-update",
            "balance" => "mass-balance",
            _ => return None,
        })
    };
    // variable bounds of the IR carry these families
    let family_of_bound = |name: &str| -> Option<&'static str> {
        let kind = name.split(':').next().unwrap();
        Some(match kind {
            "dh+" | "dh-" => "pipe-headdiff-gate",
            "q+" | "q-" => "pipe-flow-gate",
            "qpu" => "pump-flow-gate",
            "vol" => "tank-volume-bounds",
            "qres" => "reservoir-nonneg",
            "qdem" => "demand-cap",
            "head" => "head-bounds",
            _ => return None,
        })
    };
    let comparable: std::collections::BTreeSet<&'static str> = [
        "pipe-flow-split",
        "pipe-flow-gate",
        "pipe-headdiff-gate",
        "pipe-head-link",
        "pipe-head-loss",
        "pump-flow-gate",
        "pump-head-link",
        "pump-head-gain",
        "pump-power",
        "tank-volume-head",
        "tank-initial",
        "tank-volume-update",
        "tank-volume-bounds",
        "reservoir-nonneg",
        "demand-cap",
        "head-bounds",
        "mass-balance",
        "binary",
    ]
    .into();

    let (_, feasible) = brute_force_optimum(&net, 1e-2).unwrap().unwrap();
    for case in 0..1000 {
        // half the maps perturb a feasible point, half are wild
        let mut values: BTreeMap<String, f64> = feasible.clone();
        let kicks = rng.random_range(0..4);
        for _ in 0..kicks {
            let idx = rng.random_range(0..m.num_vars());
            let name = m.var(model_ir::VarId(idx)).name.clone();
            *values.get_mut(&name).unwrap() += rng.random_range(-0.5..0.5);
        }
        if case % 2 == 1 {
            for v in values.values_mut() {
                *v += rng.random_range(-0.2..0.2);
            }
        }

        // IR evaluation: violated row families plus nonlinear terms
        let tol = 1e-6;
        let mut ir_families = std::collections::BTreeSet::new();
        let x: Vec<f64> = m.vars.iter().map(|v| values[&v.name]).collect();
        for c in &m.constraints {
            let lhs: f64 = c.terms.iter().map(|&(id, co)| co * x[id.0]).sum();
            let breach = match c.cmp {
                model_ir::Cmp::Le => lhs - c.rhs,
                model_ir::Cmp::Ge => c.rhs - lhs,
                model_ir::Cmp::Eq => (lhs - c.rhs).abs(),
            };
            if breach > tol {
                if let Some(f) = family_of_row(&c.name) {
                    ir_families.insert(f);
                }
            }
        }
        for (i, v) in m.vars.iter().enumerate() {
            if v.kind == model_ir::VarKind::Binary && (x[i] - x[i].round()).abs() > tol {
                ir_families.insert("binary");
            }
            let breach = (x[i] - v.upper).max(v.lower - x[i]);
            if breach > tol {
                if let Some(f) = family_of_bound(&v.name) {
                    ir_families.insert(f);
                }
            }
        }
        for term in &m.nonlinear {
            let out = x[term.out_var().0];
            let base = x[term.base_var().0];
            let expected = match term.kind {
                model_ir::TermKind::SignedPower { scale, exponent, .. } => {
                    scale * base.max(0.0).powf(exponent)
                }
                model_ir::TermKind::Quadratic { alpha, beta, gamma, z, .. } => {
                    alpha * base * base + beta * base + gamma * x[z.0]
                }
            };
            if (out - expected).abs() > tol {
                ir_families.insert(match term.kind {
                    model_ir::TermKind::SignedPower { .. } => "pipe-head-loss",
                    model_ir::TermKind::Quadratic { .. } => "pump-head-gain",
                });
            }
        }

        let report = check_feasibility(&net, &values, &OracleTolerance {
            flow_head_abs: tol,
            volume_abs: tol,
            binary: tol,
        })
        .unwrap();
        let oracle_families: std::collections::BTreeSet<&'static str> = report
            .families()
            .intersection(&comparable)
            .copied()
            .collect();
        assert_eq!(oracle_families, ir_families, "case {case}: value map {values:?}");
    }
}

/// A feasible oracle point satisfies every linear row of the model within
/// 1e-8 and every nonlinear term within 1e-6.
#[test]
fn feasible_point_satisfies_model_rows() {
    for name in ["micro.json", "micro-tight.json", "micro-trap.json"] {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name);
        let net = ingest_io::parse_native(&std::fs::read_to_string(path).unwrap()).unwrap();
        let Some((_, values)) = brute_force_optimum(&net, 1e-3).unwrap() else {
            panic!("{name} should be feasible")
        };
        let m = model_ir::build_n1(&net).unwrap();
        let x: Vec<f64> = m.vars.iter().map(|v| values[&v.name]).collect();
        for c in &m.constraints {
            let lhs: f64 = c.terms.iter().map(|&(id, co)| co * x[id.0]).sum();
            let breach = match c.cmp {
                model_ir::Cmp::Le => lhs - c.rhs,
                model_ir::Cmp::Ge => c.rhs - lhs,
                model_ir::Cmp::Eq => (lhs - c.rhs).abs(),
            };
            assert!(breach <= 1e-8, "{name}: row {} breached by {breach}", c.name);
        }
        for term in &m.nonlinear {
            let out = x[term.out_var().0];
            let base = x[term.base_var().0];
            let expected = match term.kind {
                model_ir::TermKind::SignedPower { scale, exponent, .. } => {
                    scale * base.max(0.0).powf(exponent)
                }
                model_ir::TermKind::Quadratic { alpha, beta, gamma, z, .. } => {
                    alpha * base * base + beta * base + gamma * x[z.0]
                }
            };
            assert!((out - expected).abs() <= 1e-6, "{name}: term {} off by {}", term.id, out - expected);
        }
    }
}
