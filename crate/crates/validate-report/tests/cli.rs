use std::path::{Path, PathBuf};
use std::process::Command;

fn wdn() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wdn"))
}

fn instance_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

#[test]
fn validate_ok_and_exit_codes() {
    let out = wdn().args(["validate", "--instance"]).arg(instance_path("micro.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("valid"));

    // nonexistent file is an input error
    let out = wdn().args(["validate", "--instance", "/nonexistent.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn validate_flags_violations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = std::fs::read_to_string(instance_path("micro.json"))
        .unwrap()
        .replace("\"head_alpha\": -0.5", "\"head_alpha\": 0.5");
    std::fs::write(&path, text).unwrap();
    let out = wdn().args(["validate", "--instance"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    let all = format!(
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(all.contains("alpha"), "{all}");
}

#[test]
fn inp_warnings_surface_on_stderr() {
    let out = wdn()
        .args(["validate", "--instance"])
        .arg(instance_path("gravity.inp"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
}

#[test]
fn solve_micro_certifies() {
    let out = wdn()
        .args(["solve", "--kmax", "4", "--tmax", "60", "--instance"])
        .arg(instance_path("micro.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("certified=true"), "{text}");
}

#[test]
fn relax_prints_bound() {
    let out = wdn()
        .args(["relax", "--level", "2", "--tmax", "60", "--instance"])
        .arg(instance_path("micro-tight.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("bound 3.476155"));
}

#[test]
fn recover_from_candidate_file() {
    let dir = tempfile::tempdir().unwrap();
    let cand = dir.path().join("cand.json");
    std::fs::write(&cand, r#"{"y:P1:0": 1, "y:P1:1": 1, "z:PU1:0": 1, "z:PU1:1": 0}"#).unwrap();
    let out = wdn()
        .args(["recover", "--tmax", "60", "--instance"])
        .arg(instance_path("micro-trap.json"))
        .arg("--candidate")
        .arg(&cand)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("h_bar 1"), "{text}");
}

#[test]
fn solve_with_external_backend_through_own_binary() {
    let out = wdn()
        .args([
            "solve",
            "--kmax",
            "3",
            "--tmax",
            "60",
            "--backend",
            "external",
            "--solver-path",
            env!("CARGO_BIN_EXE_wdn"),
            "--instance",
        ])
        .arg(instance_path("micro.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("certified=true"));
}

#[test]
fn checkpoint_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("state.json");
    let run = |extra: &[&str]| {
        let mut cmd = wdn();
        cmd.args(["solve", "--tmax", "60", "--instance"])
            .arg(instance_path("micro-trap.json"))
            .arg("--checkpoint")
            .arg(&ckpt)
            .args(extra);
        cmd.output().unwrap()
    };
    let first = run(&["--kmax", "2"]);
    assert_eq!(first.status.code(), Some(2), "not certified after two levels: {first:?}");
    assert!(ckpt.exists());
    let resumed = run(&["--kmax", "4", "--resume"]);
    assert_eq!(resumed.status.code(), Some(0), "{resumed:?}");
    let text = String::from_utf8_lossy(&resumed.stdout);
    // records from the checkpointed levels are retained in the report
    assert!(text.lines().any(|l| l.starts_with("1,")), "{text}");
    assert!(text.contains("certified=true"), "{text}");
}

#[test]
fn milp_solve_round_trip(){
    let dir = tempfile::tempdir().unwrap();
    let mps = dir.path().join("m.mps");
    let sol = dir.path().join("m.sol");
    let mut model = model_ir::ModelIR::new("t", model_ir::Sense::Maximize, model_ir::Provenance::L1);
    let x = model.add_var("x", model_ir::VarKind::Continuous, 0.0, f64::INFINITY);
    let z = model.add_var("z:a:0", model_ir::VarKind::Binary, 0.0, 1.0);
    model.objective.terms.push((x, 1.0));
    model.objective.terms.push((z, 2.0));
    model.add_constraint("cap", vec![(x, 1.0), (z, 3.0)], model_ir::Cmp::Le, 4.0);
    let (text, table) = model_ir::write_mps(&model).unwrap();
    std::fs::write(&mps, text).unwrap();

    let out = wdn()
        .args(["milp-solve", "--timelimit", "30", "--mps"])
        .arg(&mps)
        .arg("--sol")
        .arg(&sol)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let solution = model_ir::read_solution(&std::fs::read_to_string(&sol).unwrap(), &table).unwrap();
    assert_eq!(solution.status, model_ir::SolStatus::Optimal);
    // optimum: z = 0, x = 4 -> 4
    assert!((solution.objective - 4.0).abs() < 1e-6);
    assert!((solution.values[x.0] - 4.0).abs() < 1e-6);
    assert!(solution.values[z.0].abs() < 1e-6);
}

#[test]
fn bench_deterministic_without_times() {
    let run = || {
        let out = wdn()
            .args(["bench", "--kmax", "3", "--tmax", "60", "--no-times", "--instance"])
            .arg(instance_path("micro-trap.json"))
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{out:?}");
        out.stdout
    };
    assert_eq!(run(), run());
}

fn assert_path_is_file(p: &Path) {
    assert!(p.is_file(), "{} missing", p.display());
}

#[test]
fn out_flag_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let out = wdn()
        .args(["bench", "--kmax", "2", "--tmax", "60", "--instance"])
        .arg(instance_path("micro.json"))
        .arg("--out")
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert_path_is_file(&report);
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("k,n_partitions"));
}

#[test]
fn solve_without_feasible_solution_exits_3() {
    // tank initial level pins the junction head above its bounds
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("impossible.json");
    let text = std::fs::read_to_string(instance_path("micro.json"))
        .unwrap()
        .replace("\"head_min_m\": 11.0, \"head_max_m\": 14.0", "\"head_min_m\": 13.0, \"head_max_m\": 14.0");
    std::fs::write(&path, text).unwrap();
    let out = wdn()
        .args(["solve", "--kmax", "2", "--tmax", "30", "--instance"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn broken_external_backend_exits_5() {
    let out = wdn()
        .args([
            "solve",
            "--kmax",
            "1",
            "--tmax",
            "10",
            "--backend",
            "external",
            "--solver-path",
            "/bin/false",
            "--instance",
        ])
        .arg(instance_path("micro.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5), "{out:?}");
}
