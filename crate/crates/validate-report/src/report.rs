//! Iteration-wise bench tables in CSV and JSON.

use recovery::RunResult;

/// One table row, rendered with fixed formatting: objectives at four
/// decimals, the gap as a two-decimal percentage, times at two decimals.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub k: usize,
    pub n_partitions: usize,
    pub h_bar: Option<usize>,
    pub ub_l1: Option<f64>,
    pub obj_alg: Option<f64>,
    pub gap_pct: Option<f64>,
    pub t_lp_s: f64,
    pub t_rec_s: f64,
    pub t_total_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub format: ReportFormat,
    /// Zero out wall-clock columns: bench output becomes run-to-run
    /// byte-identical.
    pub include_times: bool,
    /// External reference time; fills the summary speedup column.
    pub reference_time_s: Option<f64>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { format: ReportFormat::Csv, include_times: true, reference_time_s: None }
    }
}

/// Derive table rows from a run: the objective column carries the incumbent
/// as of each iteration, and the gap is `(ub − obj)/ub` in percent for
/// positive bounds.
pub fn bench_rows(result: &RunResult) -> Vec<BenchRow> {
    let mut rows = Vec::with_capacity(result.records.len());
    let mut incumbent: Option<f64> = None;
    for r in &result.records {
        if let Some(obj) = r.recovered_objective {
            incumbent = Some(incumbent.map_or(obj, |b: f64| b.max(obj)));
        }
        let gap = match (r.ub_l1, incumbent) {
            (Some(ub), Some(obj)) if ub > 0.0 => Some((ub - obj) / ub * 100.0),
            _ => None,
        };
        rows.push(BenchRow {
            k: r.k,
            n_partitions: r.n_partitions,
            h_bar: r.h_bar,
            ub_l1: r.ub_l1,
            obj_alg: incumbent,
            gap_pct: gap,
            t_lp_s: r.t_lp_s,
            t_rec_s: r.t_rec_s,
            t_total_s: r.t_lp_s + r.t_rec_s,
        });
    }
    rows
}

fn fmt_opt_f(v: Option<f64>, decimals: usize) -> String {
    v.map_or(String::new(), |x| format!("{x:.decimals$}"))
}

fn fmt_opt_u(v: Option<usize>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// Render a run as a report. CSV and JSON carry identical numbers (both are
/// derived from the same fixed-format strings); output is deterministic and
/// locale-independent.
pub fn emit_report(result: &RunResult, opts: &ReportOptions) -> String {
    let rows = bench_rows(result);
    let time = |v: f64| if opts.include_times { format!("{v:.2}") } else { "0.00".to_string() };
    let best = result.incumbent.as_ref().map(|i| i.objective);
    let termination = match result.termination {
        recovery::Termination::Certified => "certified",
        recovery::Termination::KMaxReached => "kmax",
        recovery::Termination::DeadlineReached => "tmax",
    };
    let total = if opts.include_times { format!("{:.2}", result.total_time_s) } else { "0.00".into() };
    let speedup = opts
        .reference_time_s
        .map(|r| {
            if result.total_time_s > 0.0 && opts.include_times {
                format!("{:.2}", r / result.total_time_s)
            } else {
                String::new()
            }
        })
        .unwrap_or_default();

    match opts.format {
        ReportFormat::Csv => {
            let mut out = String::from("k,n_partitions,h_bar,ub_l1,obj_alg,gap_pct,t_lp_s,t_rec_s,t_total_s\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    r.k,
                    r.n_partitions,
                    fmt_opt_u(r.h_bar),
                    fmt_opt_f(r.ub_l1, 4),
                    fmt_opt_f(r.obj_alg, 4),
                    fmt_opt_f(r.gap_pct, 2),
                    time(r.t_lp_s),
                    time(r.t_rec_s),
                    time(r.t_total_s),
                ));
            }
            out.push_str(&format!(
                "summary,best_objective={},certified={},termination={},total_time_s={},speedup={}\n",
                fmt_opt_f(best, 4),
                result.certified,
                termination,
                total,
                speedup,
            ));
            out
        }
        ReportFormat::Json => {
            // numbers mirror the CSV formatting exactly
            let mut items = Vec::new();
            for r in &rows {
                let mut fields = vec![
                    format!("\"k\": {}", r.k),
                    format!("\"n_partitions\": {}", r.n_partitions),
                ];
                if let Some(h) = r.h_bar {
                    fields.push(format!("\"h_bar\": {h}"));
                }
                if let Some(ub) = r.ub_l1 {
                    fields.push(format!("\"ub_l1\": {ub:.4}"));
                }
                if let Some(obj) = r.obj_alg {
                    fields.push(format!("\"obj_alg\": {obj:.4}"));
                }
                if let Some(g) = r.gap_pct {
                    fields.push(format!("\"gap_pct\": {g:.2}"));
                }
                fields.push(format!("\"t_lp_s\": {}", time(r.t_lp_s)));
                fields.push(format!("\"t_rec_s\": {}", time(r.t_rec_s)));
                fields.push(format!("\"t_total_s\": {}", time(r.t_total_s)));
                items.push(format!("    {{{}}}", fields.join(", ")));
            }
            let best_field = best.map_or("null".into(), |b| format!("{b:.4}"));
            let speedup_field = if speedup.is_empty() { "null".to_string() } else { speedup };
            format!(
                "{{\n  \"rows\": [\n{}\n  ],\n  \"summary\": {{\"best_objective\": {}, \"certified\": {}, \"termination\": \"{}\", \"total_time_s\": {}, \"speedup\": {}}}\n}}\n",
                items.join(",\n"),
                best_field,
                result.certified,
                termination,
                total,
                speedup_field,
            )
        }
    }
}
