//! Command-line front end: validate instances, build and solve relaxations,
//! recover feasible solutions, and run the full refinement pipeline.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use model_ir::{build_n1, read_mps, write_solution, SolStatus};
use recovery::{RecoveryConfig, SubsetSelector};
use solvers::{micro_branch_and_bound, BackendConfig, ExternalSolver, MicroLimits, OutcomeStatus, SlpConfig};
use validate_report::instances::{load_instance, InstanceFormat};
use validate_report::{emit_report, ReportFormat, ReportOptions};

const EXIT_OK: u8 = 0;
const EXIT_FEASIBLE_NOT_CERTIFIED: u8 = 2;
const EXIT_NO_SOLUTION: u8 = 3;
const EXIT_INPUT: u8 = 4;
const EXIT_BACKEND: u8 = 5;

#[derive(Parser)]
#[command(name = "wdn", about = "Water network demand maximization toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Auto,
    Json,
    Inp,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Micro,
    External,
}

#[derive(Clone, Copy, ValueEnum)]
enum SubsetArg {
    Pumps,
    All,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportArg {
    Csv,
    Json,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file (native .json or EPANET .inp)
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    format: FormatArg,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value = "micro")]
    backend: BackendArg,
    /// External solver executable; defaults to $WDN_MILP_SOLVER
    #[arg(long)]
    solver_path: Option<PathBuf>,
    /// Time limit per solver call, seconds
    #[arg(long, default_value_t = 3000.0)]
    tmax: f64,
    /// Maximum partition refinements
    #[arg(long, default_value_t = 6)]
    kmax: usize,
    /// Certification tolerance
    #[arg(long, default_value_t = 1e-4)]
    eps_opt: f64,
    /// Integer subset searched by the neighborhood recovery
    #[arg(long = "is", value_enum, default_value = "pumps")]
    subset: SubsetArg,
    /// Cap on the inner relaxation partition level of the restricted search
    #[arg(long)]
    inner_cap: Option<usize>,
    /// Wall-clock budget for the whole run, seconds
    #[arg(long)]
    deadline: Option<f64>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    report: ReportArg,
    /// Zero timing columns for byte-reproducible output
    #[arg(long)]
    no_times: bool,
    /// Reference wall time filling the summary speedup column
    #[arg(long)]
    reference_time: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance against the data-model invariants
    Validate {
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Run the full pipeline: refinement, neighborhood search, tie-breaking
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Checkpoint file updated after every refinement level
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Resume from the checkpoint file
        #[arg(long)]
        resume: bool,
    },
    /// Solve the MILP relaxation at one partition level and print its bound
    Relax {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Recover a feasible solution from a candidate file (JSON tag -> 0/1)
    Recover {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        candidate: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Iteration sweep k = 1..kmax emitting the bench table
    Bench {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve an MPS file with the built-in micro solver (external-backend
    /// protocol: reads {mps}, writes {sol})
    MilpSolve {
        #[arg(long)]
        mps: PathBuf,
        #[arg(long)]
        sol: PathBuf,
        #[arg(long, default_value_t = 3000.0)]
        timelimit: f64,
        #[arg(long, default_value_t = 4096)]
        max_binaries: usize,
        #[arg(long, default_value_t = 200000)]
        max_vars: usize,
    },
}

fn backend_config(args: &SolveArgs) -> Result<BackendConfig, String> {
    let cfg = match args.backend {
        BackendArg::Micro => BackendConfig::micro_with(MicroLimits {
            max_binaries: 4096,
            max_vars: 200_000,
            ..MicroLimits::default()
        }),
        BackendArg::External => {
            let path = args
                .solver_path
                .clone()
                .or_else(|| std::env::var(solvers::SOLVER_PATH_ENV).ok().map(PathBuf::from))
                .ok_or_else(|| {
                    format!("external backend needs --solver-path or ${}", solvers::SOLVER_PATH_ENV)
                })?;
            BackendConfig::external(ExternalSolver::generic(path))
        }
    };
    Ok(cfg.with_time_limit(args.tmax))
}

fn recovery_config(args: &SolveArgs, checkpoint: Option<PathBuf>) -> RecoveryConfig {
    RecoveryConfig {
        subset: match args.subset {
            SubsetArg::Pumps => SubsetSelector::Pumps,
            SubsetArg::All => SubsetSelector::All,
            SubsetArg::None => SubsetSelector::None,
        },
        tmax_per_call_s: args.tmax,
        k_max: args.kmax,
        eps_opt: args.eps_opt,
        inner_level_cap: args.inner_cap,
        global_deadline_s: args.deadline,
        checkpoint_path: checkpoint,
        ..RecoveryConfig::default()
    }
}

fn load(instance: &InstanceArgs) -> Result<wdn_core::Network, u8> {
    let format = match instance.format {
        FormatArg::Auto => InstanceFormat::Auto,
        FormatArg::Json => InstanceFormat::Json,
        FormatArg::Inp => InstanceFormat::Inp,
    };
    match load_instance(&instance.instance, format) {
        Ok((net, warnings)) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            Ok(net)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Err(EXIT_INPUT)
        }
    }
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<(), u8> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            EXIT_INPUT
        }),
    }
}

fn report_options(output: &OutputArgs) -> ReportOptions {
    ReportOptions {
        format: match output.report {
            ReportArg::Csv => ReportFormat::Csv,
            ReportArg::Json => ReportFormat::Json,
        },
        include_times: !output.no_times,
        reference_time_s: output.reference_time,
    }
}

fn run() -> u8 {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { instance } => {
            let net = match load(&instance) {
                Ok(n) => n,
                Err(code) => return code,
            };
            let report = wdn_core::validate_network(&net);
            if report.is_valid() {
                println!("valid: {} junctions, {} pipes, {} pumps, {} tanks, {} reservoirs, {} demand points, {} time points",
                    net.junctions.len(), net.pipes.len(), net.pumps.len(), net.tanks.len(),
                    net.reservoirs.len(), net.demands.len(), net.time.num_points);
                EXIT_OK
            } else {
                print!("{report}");
                EXIT_INPUT
            }
        }
        Command::Solve { instance, solve, output, checkpoint, resume } => {
            let net = match load(&instance) {
                Ok(n) => n,
                Err(code) => return code,
            };
            let backend = match backend_config(&solve) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_INPUT;
                }
            };
            let cfg = recovery_config(&solve, checkpoint.clone());
            let slp = SlpConfig { time_limit_s: solve.tmax, ..SlpConfig::default() };
            let result = if resume {
                let Some(path) = &checkpoint else {
                    eprintln!("error: --resume needs --checkpoint");
                    return EXIT_INPUT;
                };
                match recovery::read_checkpoint(path) {
                    Ok(state) => {
                        recovery::refine_loop_tiebreak_resumed(&net, &cfg, &backend, &slp, state)
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        return EXIT_INPUT;
                    }
                }
            } else {
                recovery::refine_loop_tiebreak(&net, &cfg, &backend, &slp)
            };
            let result = match result {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_BACKEND;
                }
            };
            let text = emit_report(&result, &report_options(&output));
            if write_out(&output.out, &text).is_err() {
                return EXIT_INPUT;
            }
            match (&result.incumbent, result.certified) {
                (Some(_), true) => EXIT_OK,
                (Some(_), false) => EXIT_FEASIBLE_NOT_CERTIFIED,
                (None, _) => EXIT_NO_SOLUTION,
            }
        }
        Command::Relax { instance, level, solve } => {
            let net = match load(&instance) {
                Ok(n) => n,
                Err(code) => return code,
            };
            let backend = match backend_config(&solve) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_INPUT;
                }
            };
            let outcome = build_n1(&net)
                .map_err(|e| e.to_string())
                .and_then(|n1| relaxation::partition_at_level(&n1, level).map_err(|e| e.to_string()))
                .and_then(|ps| relaxation::build_l1(&net, &ps).map_err(|e| e.to_string()))
                .and_then(|l1| solvers::solve_milp(&l1, &backend).map_err(|e| e.to_string()));
            match outcome {
                Ok(out) => match out.objective {
                    Some(obj) => {
                        println!("level {level}: status {:?}, bound {obj:.6}", out.status);
                        EXIT_OK
                    }
                    None => {
                        println!("level {level}: status {:?}", out.status);
                        EXIT_NO_SOLUTION
                    }
                },
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_BACKEND
                }
            }
        }
        Command::Recover { instance, candidate, solve } => {
            let net = match load(&instance) {
                Ok(n) => n,
                Err(code) => return code,
            };
            let text = match std::fs::read_to_string(&candidate) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read candidate: {e}");
                    return EXIT_INPUT;
                }
            };
            let raw: BTreeMap<String, f64> = match serde_json::from_str(&text) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("error: candidate file: {e}");
                    return EXIT_INPUT;
                }
            };
            let assignment: recovery::Assignment =
                raw.into_iter().map(|(k, v)| (k, v != 0.0)).collect();
            let backend = match backend_config(&solve) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_INPUT;
                }
            };
            let cfg = recovery_config(&solve, None);
            let slp = SlpConfig { time_limit_s: solve.tmax, ..SlpConfig::default() };
            match recovery::neighborhood_recover(&net, &assignment, &cfg, &backend, &slp) {
                Ok((out, h_bar)) => {
                    if out.is_feasible() {
                        println!(
                            "feasible: objective {:.6}, h_bar {}",
                            out.objective.unwrap(),
                            h_bar.map_or("-".into(), |h| h.to_string())
                        );
                        EXIT_OK
                    } else {
                        println!("no feasible solution recovered (status {:?})", out.status);
                        EXIT_NO_SOLUTION
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_BACKEND
                }
            }
        }
        Command::Bench { instance, solve, output } => {
            let net = match load(&instance) {
                Ok(n) => n,
                Err(code) => return code,
            };
            let backend = match backend_config(&solve) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_INPUT;
                }
            };
            let mut cfg = recovery_config(&solve, None);
            cfg.certify = false; // sweep every level for the table
            let slp = SlpConfig { time_limit_s: solve.tmax, ..SlpConfig::default() };
            match recovery::refine_loop_tiebreak(&net, &cfg, &backend, &slp) {
                Ok(result) => {
                    let text = emit_report(&result, &report_options(&output));
                    if write_out(&output.out, &text).is_err() {
                        return EXIT_INPUT;
                    }
                    if result.incumbent.is_some() {
                        EXIT_OK
                    } else {
                        EXIT_NO_SOLUTION
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_BACKEND
                }
            }
        }
        Command::MilpSolve { mps, sol, timelimit, max_binaries, max_vars } => {
            let text = match std::fs::read_to_string(&mps) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read MPS: {e}");
                    return EXIT_INPUT;
                }
            };
            let model = match read_mps(&text) {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_INPUT;
                }
            };
            let limits = MicroLimits { max_binaries, max_vars, ..MicroLimits::default() };
            match micro_branch_and_bound(&model, &limits, timelimit, 1e-9) {
                Ok(out) => {
                    let status = match out.status {
                        OutcomeStatus::Optimal => SolStatus::Optimal,
                        OutcomeStatus::Feasible => SolStatus::Feasible,
                        OutcomeStatus::Infeasible => SolStatus::Infeasible,
                        OutcomeStatus::TimeoutNoSolution => SolStatus::Timeout,
                    };
                    let text = write_solution(&model, out.solution.as_ref(), status);
                    if let Err(e) = std::fs::write(&sol, text) {
                        eprintln!("error: cannot write solution: {e}");
                        return EXIT_INPUT;
                    }
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_BACKEND
                }
            }
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run())
}
