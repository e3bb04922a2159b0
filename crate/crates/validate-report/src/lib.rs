//! Validation and reporting: an independent hydraulic feasibility oracle
//! (a separate code path from the model IR), a brute-force oracle for micro
//! instances, and iteration-table emission. The `wdn` binary in this crate
//! is the command-line front end.

mod brute;
mod oracle;
mod report;

pub mod instances;

pub use brute::{brute_force_optimum, enumerate_schedules, BruteError};
pub use oracle::{check_feasibility, OracleError, OracleTolerance, OracleViolation, ViolationReport};
pub use report::{bench_rows, emit_report, BenchRow, ReportFormat, ReportOptions};
