use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateSource {
    L1,
    L2,
}

/// Per-refinement book-keeping mirroring the iteration tables: partition
/// count, the smallest feasible neighborhood radius, bounds, objectives and
/// timings, plus the raw per-leg timers the aggregation is derived from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// Intervals per term group at this level (2^k under bisection).
    pub n_partitions: usize,
    pub h_bar: Option<usize>,
    /// Objective of the relaxation at this level, when solved.
    pub ub_l1: Option<f64>,
    /// Whether `ub_l1` is a proven bound (optimal solve or dual bound).
    pub ub_rigorous: bool,
    /// Objective recovered at this iteration (not the incumbent).
    pub recovered_objective: Option<f64>,
    pub candidate_source: Option<CandidateSource>,
    pub t_l1_s: f64,
    pub t_l2_s: f64,
    pub t_rec1_s: f64,
    pub t_rec2_s: f64,
    /// Candidate-generation time: `t_l1`, plus `t_l2` when the tie-breaking
    /// recovery produced the iteration's solution.
    pub t_lp_s: f64,
    /// Recovery time of whichever leg produced the iteration's solution.
    pub t_rec_s: f64,
    pub l1_status: String,
    pub l2_status: String,
    pub rec1_status: String,
    pub rec2_status: String,
}

impl IterationRecord {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            n_partitions: 1 << k,
            h_bar: None,
            ub_l1: None,
            ub_rigorous: false,
            recovered_objective: None,
            candidate_source: None,
            t_l1_s: 0.0,
            t_l2_s: 0.0,
            t_rec1_s: 0.0,
            t_rec2_s: 0.0,
            t_lp_s: 0.0,
            t_rec_s: 0.0,
            l1_status: "skipped".into(),
            l2_status: "skipped".into(),
            rec1_status: "skipped".into(),
            rec2_status: "skipped".into(),
        }
    }
}

/// Best feasible solution found so far.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Incumbent {
    pub objective: f64,
    /// Variable values keyed by semantic tag.
    pub values: BTreeMap<String, f64>,
    pub source: CandidateSource,
    pub found_at_k: usize,
    pub h_bar: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Certified,
    KMaxReached,
    DeadlineReached,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub incumbent: Option<Incumbent>,
    pub certified: bool,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    /// Tightest proven relaxation bound seen across iterations.
    pub best_ub: Option<f64>,
    pub total_time_s: f64,
}

/// Resumable snapshot written after every refinement level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunState {
    pub k_done: usize,
    /// Partition set as produced by its JSON serialization.
    pub partitions: serde_json::Value,
    pub incumbent: Option<Incumbent>,
    pub records: Vec<IterationRecord>,
    pub best_ub: Option<f64>,
}
