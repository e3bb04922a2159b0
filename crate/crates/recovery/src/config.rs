use std::collections::BTreeSet;
use std::path::PathBuf;

use model_ir::ModelIR;
use serde::{Deserialize, Serialize};

/// Which integer variables the neighborhood search may flip. Everything
/// outside the subset stays pinned to the candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsetSelector {
    /// Pump activation binaries only; flow-direction binaries are fixed from
    /// the candidate, which transfers the relaxation's direction choices to
    /// the NLP.
    Pumps,
    /// Every integer variable.
    All,
    /// Empty subset: the search degenerates to the baseline recovery.
    None,
    /// Explicit list of binary tags.
    Explicit(Vec<String>),
}

impl SubsetSelector {
    pub fn resolve(&self, model: &ModelIR) -> BTreeSet<String> {
        match self {
            SubsetSelector::Pumps => model
                .binary_ids()
                .map(|id| model.var(id).name.clone())
                .filter(|n| n.starts_with("z:"))
                .collect(),
            SubsetSelector::All => model
                .binary_ids()
                .map(|id| model.var(id).name.clone())
                .filter(|n| n.starts_with("z:") || n.starts_with("y:"))
                .collect(),
            SubsetSelector::None => BTreeSet::new(),
            SubsetSelector::Explicit(names) => names.iter().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryConfig {
    pub subset: SubsetSelector,
    /// Per solver call (L1, L2 and each restricted-search MILP), seconds.
    pub tmax_per_call_s: f64,
    /// Maximum partition refinements.
    pub k_max: usize,
    /// Certification tolerance on |c* − c*_L1|.
    pub eps_opt: f64,
    /// No-good iterations per (candidate, h) before giving up.
    pub nogood_cap: usize,
    /// The restricted MINLP is searched through a relaxation at partition
    /// level `outer + inner_level_offset`, optionally capped.
    pub inner_level_offset: usize,
    pub inner_level_cap: Option<usize>,
    /// Wall-clock budget for a whole run, on top of the per-call limits.
    pub global_deadline_s: Option<f64>,
    /// Write resumable run state here after every refinement.
    pub checkpoint_path: Option<PathBuf>,
    /// Stop once the incumbent is within `eps_opt` of the bound. Bench
    /// sweeps disable this to tabulate every level.
    pub certify: bool,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            subset: SubsetSelector::Pumps,
            tmax_per_call_s: 3000.0,
            k_max: 6,
            eps_opt: 1e-4,
            nogood_cap: 50,
            inner_level_offset: 2,
            inner_level_cap: None,
            global_deadline_s: None,
            checkpoint_path: None,
            certify: true,
        }
    }
}

impl RecoveryConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tmax_per_call_s > 0.0) {
            return Err(format!("per-call time limit must be positive, got {}", self.tmax_per_call_s));
        }
        if self.k_max < 1 {
            return Err("at least one refinement required".into());
        }
        if self.eps_opt < 0.0 {
            return Err(format!("certification tolerance must be nonnegative, got {}", self.eps_opt));
        }
        Ok(())
    }

    pub fn inner_level(&self, outer: usize) -> usize {
        let level = outer + self.inner_level_offset;
        match self.inner_level_cap {
            Some(cap) => level.min(cap),
            None => level,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_experimental_protocol() {
        let cfg = RecoveryConfig::default();
        assert_eq!(cfg.tmax_per_call_s, 3000.0);
        assert_eq!(cfg.subset, SubsetSelector::Pumps);
        assert!(cfg.certify);
        // inner relaxation level follows the outer level plus two, capped
        assert_eq!(cfg.inner_level(3), 5);
        let capped = RecoveryConfig { inner_level_cap: Some(4), ..RecoveryConfig::default() };
        assert_eq!(capped.inner_level(3), 4);
        assert!(cfg.validate().is_ok());
        assert!(RecoveryConfig { k_max: 0, ..RecoveryConfig::default() }.validate().is_err());
        assert!(RecoveryConfig { eps_opt: -1.0, ..RecoveryConfig::default() }.validate().is_err());
    }
}
