use thiserror::Error;

use crate::ir::{ModelIR, SolStatus, Solution};
use crate::mps::NameTable;

#[derive(Debug, Error)]
pub enum SolFileError {
    #[error("missing STATUS header")]
    MissingStatus,
    #[error("unparseable status `{0}`")]
    UnparseableStatus(String),
    #[error("unknown variable name `{0}`")]
    UnknownVariable(String),
    #[error("bad value for `{name}`: {value}")]
    BadValue { name: String, value: String },
}

fn status_str(s: SolStatus) -> &'static str {
    match s {
        SolStatus::Optimal => "optimal",
        SolStatus::Feasible => "feasible",
        SolStatus::Infeasible => "infeasible",
        SolStatus::Timeout => "timeout_no_solution",
    }
}

/// Render a solution in the exchange grammar: a `STATUS` header, an optional
/// `OBJECTIVE` line, then one `name value` pair per line in variable order.
pub fn write_solution(model: &ModelIR, solution: Option<&Solution>, status: SolStatus) -> String {
    let mut out = String::new();
    out.push_str(&format!("STATUS {}\n", status_str(status)));
    if let Some(sol) = solution {
        out.push_str(&format!("OBJECTIVE {}\n", sol.objective));
        for (v, &x) in model.vars.iter().zip(&sol.values) {
            out.push_str(&format!("{} {}\n", v.name, x));
        }
    }
    out
}

/// Parse a solution file against the writer's name table. Values come back
/// aligned to the original model's variable order; variables absent from the
/// file default to zero. The objective sign flip recorded by the MPS writer
/// is undone here.
pub fn read_solution(text: &str, table: &NameTable) -> Result<Solution, SolFileError> {
    let mut status = None;
    let mut objective: Option<f64> = None;
    let mut values = vec![0.0; table.columns.len()];
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let key = it.next().unwrap();
        let rest = it.next().unwrap_or("");
        match key {
            "STATUS" => {
                status = Some(match rest {
                    "optimal" => SolStatus::Optimal,
                    "feasible" => SolStatus::Feasible,
                    "infeasible" => SolStatus::Infeasible,
                    "timeout_no_solution" => SolStatus::Timeout,
                    other => return Err(SolFileError::UnparseableStatus(other.to_string())),
                });
            }
            "OBJECTIVE" => {
                objective = Some(rest.parse().map_err(|_| SolFileError::BadValue {
                    name: "OBJECTIVE".into(),
                    value: rest.to_string(),
                })?);
            }
            name => {
                let idx = table
                    .column_index(name)
                    .ok_or_else(|| SolFileError::UnknownVariable(name.to_string()))?;
                values[idx] = rest.parse().map_err(|_| SolFileError::BadValue {
                    name: name.to_string(),
                    value: rest.to_string(),
                })?;
            }
        }
    }
    let status = status.ok_or(SolFileError::MissingStatus)?;
    let mut objective = objective.unwrap_or(f64::NAN);
    if table.objective_negated {
        objective = -objective;
    }
    Ok(Solution { status, objective, values })
}
