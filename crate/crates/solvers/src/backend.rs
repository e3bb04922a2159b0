//! MILP backend boundary: the built-in micro branch-and-bound, or an
//! external solver process driven through MPS and a solution file.

use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::Instant;

use model_ir::{read_solution, write_mps, ModelIR, SolStatus};

use crate::bnb::{micro_branch_and_bound, MicroLimits};
use crate::error::SolverError;
use crate::outcome::{OutcomeStatus, SolveOutcome};

/// Environment variable supplying the default external solver executable.
pub const SOLVER_PATH_ENV: &str = "WDN_MILP_SOLVER";

/// External solver invocation template. Each argument may carry the
/// placeholders `{mps}`, `{sol}`, `{timelimit}`, `{gap}` and `{threads}`.
/// The process must write a solution file in the documented grammar
/// (`STATUS`/`OBJECTIVE` headers plus `name value` lines) and exit zero.
#[derive(Debug, Clone)]
pub struct ExternalSolver {
    pub path: PathBuf,
    pub args: Vec<String>,
}

impl ExternalSolver {
    /// Template for the bundled `wdn milp-solve` helper and anything
    /// speaking the same flags.
    pub fn generic(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            args: ["milp-solve", "--mps", "{mps}", "--sol", "{sol}", "--timelimit", "{timelimit}"]
                .map(String::from)
                .to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum BackendKind {
    Micro(MicroLimits),
    External(ExternalSolver),
}

#[derive(Debug, Clone)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub time_limit_s: f64,
    pub mip_gap: f64,
    pub threads: usize,
}

impl BackendConfig {
    pub fn micro() -> Self {
        Self { kind: BackendKind::Micro(MicroLimits::default()), time_limit_s: 3000.0, mip_gap: 1e-6, threads: 1 }
    }

    pub fn micro_with(limits: MicroLimits) -> Self {
        Self { kind: BackendKind::Micro(limits), ..Self::micro() }
    }

    pub fn external(solver: ExternalSolver) -> Self {
        Self { kind: BackendKind::External(solver), time_limit_s: 3000.0, mip_gap: 1e-6, threads: 1 }
    }

    /// External backend from `WDN_MILP_SOLVER`, when set.
    pub fn external_from_env() -> Option<Self> {
        std::env::var(SOLVER_PATH_ENV).ok().map(|p| Self::external(ExternalSolver::generic(p)))
    }

    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit_s = seconds;
        self
    }
}

/// Solve a linear model with the configured backend.
pub fn solve_milp(m: &ModelIR, cfg: &BackendConfig) -> Result<SolveOutcome, SolverError> {
    if !(cfg.time_limit_s > 0.0) {
        return Err(SolverError::InvalidConfig(format!(
            "time limit must be positive, got {}",
            cfg.time_limit_s
        )));
    }
    if !m.nonlinear.is_empty() {
        return Err(SolverError::NonlinearModel);
    }
    match &cfg.kind {
        BackendKind::Micro(limits) => micro_branch_and_bound(m, limits, cfg.time_limit_s, cfg.mip_gap),
        BackendKind::External(solver) => solve_external(m, solver, cfg),
    }
}

fn solve_external(
    m: &ModelIR,
    solver: &ExternalSolver,
    cfg: &BackendConfig,
) -> Result<SolveOutcome, SolverError> {
    let start = Instant::now();
    let dir = tempfile::tempdir()?;
    let mps_path = dir.path().join("model.mps");
    let sol_path = dir.path().join("model.sol");
    let (text, table) = write_mps(m)?;
    std::fs::write(&mps_path, text)?;

    let substitute = |arg: &str| {
        arg.replace("{mps}", &mps_path.to_string_lossy())
            .replace("{sol}", &sol_path.to_string_lossy())
            .replace("{timelimit}", &format!("{}", cfg.time_limit_s))
            .replace("{gap}", &format!("{}", cfg.mip_gap))
            .replace("{threads}", &format!("{}", cfg.threads))
    };
    let args: Vec<String> = solver.args.iter().map(|a| substitute(a)).collect();

    let mut child = Command::new(&solver.path)
        .args(&args)
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| SolverError::Backend {
            message: format!("failed to spawn `{}`: {e}", solver.path.display()),
            output: String::new(),
        })?;

    // grace window past the solver's own limit before the process is killed
    let hard_deadline = cfg.time_limit_s + 10.0;
    loop {
        match child.try_wait()? {
            Some(_) => break,
            None => {
                if start.elapsed().as_secs_f64() > hard_deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(SolverError::Backend {
                        message: format!("solver exceeded the hard deadline of {hard_deadline} s"),
                        output: String::new(),
                    });
                }
                std::thread::sleep(std::time::Duration::from_millis(10));
            }
        }
    }
    let output = child.wait_with_output()?;
    let captured = format!(
        "{}\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    if !output.status.success() {
        return Err(SolverError::Backend {
            message: format!("solver exited with {}", output.status),
            output: captured,
        });
    }
    let sol_text = std::fs::read_to_string(&sol_path).map_err(|e| SolverError::Backend {
        message: format!("solution file missing: {e}"),
        output: captured.clone(),
    })?;
    let solution = read_solution(&sol_text, &table).map_err(|e| SolverError::Backend {
        message: format!("unparseable solution file: {e}"),
        output: captured,
    })?;

    let wall = start.elapsed().as_secs_f64();
    let status = match solution.status {
        SolStatus::Optimal => OutcomeStatus::Optimal,
        SolStatus::Feasible => OutcomeStatus::Feasible,
        SolStatus::Infeasible => OutcomeStatus::Infeasible,
        SolStatus::Timeout => OutcomeStatus::TimeoutNoSolution,
    };
    match status {
        OutcomeStatus::Optimal | OutcomeStatus::Feasible => Ok(SolveOutcome {
            status,
            objective: Some(solution.objective),
            dual_bound: (status == OutcomeStatus::Optimal).then_some(solution.objective),
            solution: Some(solution),
            wall_time_s: wall,
            nodes: None,
            iterations: None,
            max_violation: None,
            elastic_used: None,
        }),
        _ => Ok(SolveOutcome {
            status,
            solution: None,
            objective: None,
            dual_bound: None,
            wall_time_s: wall,
            nodes: None,
            iterations: None,
            max_violation: None,
            elastic_used: None,
        }),
    }
}
