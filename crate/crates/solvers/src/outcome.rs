use model_ir::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimeoutNoSolution,
}

/// Result of one solver call (MILP backend or fixed-integer NLP).
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: OutcomeStatus,
    pub solution: Option<Solution>,
    pub objective: Option<f64>,
    /// Bound on the optimum in the model's sense (upper bound for
    /// maximization); rigorous when the status is `Optimal`.
    pub dual_bound: Option<f64>,
    pub wall_time_s: f64,
    /// Branch-and-bound nodes evaluated, when the micro backend ran.
    pub nodes: Option<u64>,
    /// SLP iterations, when the NLP path ran.
    pub iterations: Option<u64>,
    /// Largest nonlinear-constraint violation of the returned point.
    pub max_violation: Option<f64>,
    /// Whether elastic slacks were active in the final SLP subproblem.
    pub elastic_used: Option<bool>,
}

impl SolveOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, OutcomeStatus::Optimal | OutcomeStatus::Feasible)
    }

    pub fn infeasible(wall_time_s: f64) -> Self {
        Self {
            status: OutcomeStatus::Infeasible,
            solution: None,
            objective: None,
            dual_bound: None,
            wall_time_s,
            nodes: None,
            iterations: None,
            max_violation: None,
            elastic_used: None,
        }
    }
}
