use std::collections::BTreeMap;

use thiserror::Error;

/// Index of a variable inside one [`ModelIR`]. Indices are not stable across
/// models; semantic tags (variable names) are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

/// A decision variable. The `name` is the semantic tag, e.g. `head:J1:0`,
/// `q+:P1:3`, `z:PU2:0`; every physical quantity maps to exactly one tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Var {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

/// Linear constraint `sum(coeff · var) cmp rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinConstraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

/// The two nonlinear relations the model needs.
#[derive(Debug, Clone, PartialEq)]
pub enum TermKind {
    /// `out = scale · base^exponent` on a nonnegative domain.
    SignedPower { base: VarId, out: VarId, exponent: f64, scale: f64 },
    /// `out = alpha·q² + beta·q + gamma·z` with `alpha < 0`, `gamma > 0`,
    /// gated by the binary `z`.
    Quadratic { q: VarId, z: VarId, out: VarId, alpha: f64, beta: f64, gamma: f64 },
}

/// One nonlinear term instance. `group` identifies the shared partition
/// domain (same arc and direction across time points); `dom_lo/dom_hi` is
/// the base-variable domain the partitions cover.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearTerm {
    pub id: String,
    pub group: String,
    pub kind: TermKind,
    pub dom_lo: f64,
    pub dom_hi: f64,
}

impl NonlinearTerm {
    pub fn base_var(&self) -> VarId {
        match self.kind {
            TermKind::SignedPower { base, .. } => base,
            TermKind::Quadratic { q, .. } => q,
        }
    }

    pub fn out_var(&self) -> VarId {
        match self.kind {
            TermKind::SignedPower { out, .. } => out,
            TermKind::Quadratic { out, .. } => out,
        }
    }

    /// Evaluate the underlying function at a base value (`z = 1` for the
    /// quadratic kind; gating is the model's concern).
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            TermKind::SignedPower { exponent, scale, .. } => scale * x.powf(exponent),
            TermKind::Quadratic { alpha, beta, gamma, .. } => alpha * x * x + beta * x + gamma,
        }
    }

    /// Derivative of the underlying function at a base value.
    pub fn eval_deriv(&self, x: f64) -> f64 {
        match self.kind {
            TermKind::SignedPower { exponent, scale, .. } => {
                if x == 0.0 && exponent < 1.0 {
                    0.0
                } else {
                    scale * exponent * x.powf(exponent - 1.0)
                }
            }
            TermKind::Quadratic { alpha, beta, .. } => 2.0 * alpha * x + beta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
}

/// Which formulation a model instance represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    N1,
    N1Fixed,
    L1,
    L2,
    N2Relax,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("variable `{0}` is not binary")]
    NotBinary(String),
    #[error("assignment missing binary `{0}`")]
    MissingBinary(String),
    #[error("variable `{name}` has fractional value {value} in an integer projection")]
    FractionalValue { name: String, value: f64 },
    #[error("hamming distance {h} out of range 0..={max}")]
    HammingOutOfRange { h: usize, max: usize },
    #[error("no-good cut over an empty subset")]
    EmptyNoGood,
    #[error("network is invalid: {0}")]
    InvalidNetwork(String),
}

/// Solver-agnostic optimization model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelIR {
    pub name: String,
    pub vars: Vec<Var>,
    pub constraints: Vec<LinConstraint>,
    pub nonlinear: Vec<NonlinearTerm>,
    pub objective: Objective,
    pub provenance: Provenance,
    index: BTreeMap<String, VarId>,
}

impl ModelIR {
    pub fn new(name: impl Into<String>, sense: Sense, provenance: Provenance) -> Self {
        Self {
            name: name.into(),
            vars: Vec::new(),
            constraints: Vec::new(),
            nonlinear: Vec::new(),
            objective: Objective { terms: Vec::new(), sense },
            provenance,
            index: BTreeMap::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> VarId {
        let name = name.into();
        debug_assert!(!self.index.contains_key(&name), "duplicate var {name}");
        let id = VarId(self.vars.len());
        self.index.insert(name.clone(), id);
        self.vars.push(Var { name, kind, lower, upper });
        id
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        cmp: Cmp,
        rhs: f64,
    ) {
        self.constraints.push(LinConstraint { name: name.into(), terms, cmp, rhs });
    }

    pub fn var(&self, id: VarId) -> &Var {
        &self.vars[id.0]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn binary_ids(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary)
            .map(|(i, _)| VarId(i))
    }

    pub fn num_binaries(&self) -> usize {
        self.binary_ids().count()
    }

    /// Fix a variable to a single value by collapsing its bounds.
    pub fn fix_var(&mut self, id: VarId, value: f64) {
        self.vars[id.0].lower = value;
        self.vars[id.0].upper = value;
    }

    /// Evaluate the objective on a full-length value vector.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.terms.iter().map(|&(id, c)| c * values[id.0]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolStatus {
    Optimal,
    Feasible,
    Infeasible,
    Timeout,
}

/// Values for every variable of the model the solution belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolStatus,
    pub objective: f64,
    pub values: Vec<f64>,
}

impl Solution {
    /// Map variable names to values using the owning model's var table.
    pub fn value_map(&self, model: &ModelIR) -> BTreeMap<String, f64> {
        model
            .vars
            .iter()
            .zip(&self.values)
            .map(|(v, &x)| (v.name.clone(), x))
            .collect()
    }

    pub fn value(&self, model: &ModelIR, name: &str) -> Option<f64> {
        model.var_id(name).map(|id| self.values[id.0])
    }
}

/// Binary assignment keyed by semantic tag, transferable between models.
pub type Assignment = BTreeMap<String, bool>;

/// Extract the integer candidate from a relaxation solution: the values of
/// the direction and activation binaries, rounded. Fails if any of them is
/// farther than `tol` from an integer.
pub fn project_candidate(model: &ModelIR, values: &[f64], tol: f64) -> Result<Assignment, ModelError> {
    let mut out = Assignment::new();
    for id in model.binary_ids() {
        let v = model.var(id);
        if !(v.name.starts_with("y:") || v.name.starts_with("z:")) {
            continue;
        }
        let x = values[id.0];
        if (x - x.round()).abs() > tol {
            return Err(ModelError::FractionalValue { name: v.name.clone(), value: x });
        }
        out.insert(v.name.clone(), x.round() == 1.0);
    }
    Ok(out)
}
