use std::collections::BTreeMap;

use model_ir::ModelIR;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RelaxError {
    #[error("term `{0}`: base variable domain is unbounded")]
    UnboundedDomain(String),
    #[error("term `{0}`: base variable domain is empty or degenerate")]
    EmptyDomain(String),
    #[error("no partition for term group `{0}`")]
    MissingPartition(String),
    #[error("term `{0}`: negative domain for a power envelope")]
    NegativeDomain(String),
    #[error("term `{0}`: exponent must exceed 1")]
    BadExponent(String),
    #[error("term `{0}`: quadratic envelope requires alpha < 0")]
    BadAlpha(String),
    #[error("missing fixed demand value for `{0}`")]
    MissingDemandValue(String),
    #[error("partition json: {0}")]
    Json(String),
    #[error(transparent)]
    Model(#[from] model_ir::ModelError),
}

/// Sorted breakpoints over one term group's base-variable domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub group: String,
    pub breakpoints: Vec<f64>,
}

impl Partition {
    pub fn num_intervals(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.windows(2).map(|w| (w[0], w[1]))
    }
}

/// One partition per term group at a common refinement level. Groups are
/// shared across the time points of the same arc and direction, so MILP
/// growth stays linear in the horizon length.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSet {
    pub level: usize,
    map: BTreeMap<String, Partition>,
}

impl PartitionSet {
    pub fn get(&self, group: &str) -> Option<&Partition> {
        self.map.get(group)
    }

    pub fn groups(&self) -> impl Iterator<Item = &Partition> {
        self.map.values()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Serialize as JSON for run resumption.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            level: usize,
            partitions: BTreeMap<&'a str, &'a [f64]>,
        }
        let doc = Doc {
            level: self.level,
            partitions: self.map.iter().map(|(k, p)| (k.as_str(), p.breakpoints.as_slice())).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("partition set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, RelaxError> {
        #[derive(Deserialize)]
        struct Doc {
            level: usize,
            partitions: BTreeMap<String, Vec<f64>>,
        }
        let doc: Doc = serde_json::from_str(text).map_err(|e| RelaxError::Json(e.to_string()))?;
        let mut map = BTreeMap::new();
        for (group, breakpoints) in doc.partitions {
            if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                return Err(RelaxError::Json(format!("group `{group}`: breakpoints not increasing")));
            }
            map.insert(group.clone(), Partition { group, breakpoints });
        }
        Ok(Self { level: doc.level, map })
    }
}

/// Level-0 partition set: every nonlinear term group covered by the single
/// interval spanning its base-variable domain.
pub fn initial_partition(m: &ModelIR) -> Result<PartitionSet, RelaxError> {
    let mut map = BTreeMap::new();
    for term in &m.nonlinear {
        if !term.dom_lo.is_finite() || !term.dom_hi.is_finite() {
            return Err(RelaxError::UnboundedDomain(term.id.clone()));
        }
        if term.dom_lo >= term.dom_hi {
            return Err(RelaxError::EmptyDomain(term.id.clone()));
        }
        map.entry(term.group.clone()).or_insert_with(|| Partition {
            group: term.group.clone(),
            breakpoints: vec![term.dom_lo, term.dom_hi],
        });
    }
    Ok(PartitionSet { level: 0, map })
}

/// Split every interval of every partition into two equal halves.
pub fn refine(ps: &PartitionSet) -> PartitionSet {
    let map = ps
        .map
        .iter()
        .map(|(k, p)| {
            let mut bp = Vec::with_capacity(p.breakpoints.len() * 2 - 1);
            for (lo, hi) in p.intervals() {
                bp.push(lo);
                bp.push(0.5 * (lo + hi));
            }
            bp.push(*p.breakpoints.last().unwrap());
            (k.clone(), Partition { group: p.group.clone(), breakpoints: bp })
        })
        .collect();
    PartitionSet { level: ps.level + 1, map }
}

/// Refine `level` times starting from the whole-domain partition.
pub fn partition_at_level(m: &ModelIR, level: usize) -> Result<PartitionSet, RelaxError> {
    let mut ps = initial_partition(m)?;
    for _ in 0..level {
        ps = refine(&ps);
    }
    Ok(ps)
}
