use crate::network::Network;

/// One invariant violation: which element broke which rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub element: String,
    pub rule: String,
}

impl Violation {
    fn new(element: &str, rule: &str) -> Self {
        Self { element: element.to_string(), rule: rule.to_string() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_valid() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "{}: {}", v.element, v.rule)?;
            }
            Ok(())
        }
    }
}

/// Check every value-level invariant of the data model. Violations are data,
/// not errors: a valid network yields an empty list. Pure and idempotent.
pub fn validate_network(net: &Network) -> ValidationReport {
    let mut v = Vec::new();
    let n = net.time.num_points;

    if n < 1 {
        v.push(Violation::new("time", "at least one time point required"));
    }
    if !(net.time.dt_hours > 0.0) {
        v.push(Violation::new("time", "dt must be positive"));
    }

    for j in &net.junctions {
        if j.head_min > j.head_max {
            v.push(Violation::new(&j.id, "head bounds out of order"));
        }
    }

    for p in &net.pipes {
        if !(p.length > 0.0) {
            v.push(Violation::new(&p.id, "length must be positive"));
        }
        if !(p.resistance_per_length > 0.0) {
            v.push(Violation::new(&p.id, "resistance must be positive"));
        }
        if !(0.0 <= p.flow_min_pos && p.flow_min_pos <= p.flow_max_pos) {
            v.push(Violation::new(&p.id, "positive-direction flow bounds out of order"));
        }
        if !(0.0 <= p.flow_min_neg && p.flow_min_neg <= p.flow_max_neg) {
            v.push(Violation::new(&p.id, "negative-direction flow bounds out of order"));
        }
    }

    for p in &net.pumps {
        if !(p.flow_min_on > 0.0 && p.flow_min_on <= p.flow_max_on) {
            v.push(Violation::new(&p.id, "active flow bounds out of order"));
        }
        if !(p.alpha < 0.0) {
            v.push(Violation::new(&p.id, "alpha must be negative"));
        }
        if !(p.gamma > 0.0) {
            v.push(Violation::new(&p.id, "gamma must be positive"));
        }
        if p.energy_price.len() != n {
            v.push(Violation::new(&p.id, "energy price series length mismatch"));
        }
    }

    for t in &net.tanks {
        if !(t.area > 0.0) {
            v.push(Violation::new(&t.id, "area must be positive"));
        }
        if !(t.volume_min <= t.volume_initial && t.volume_initial <= t.volume_max) {
            v.push(Violation::new(&t.id, "initial volume out of bounds"));
        }
        if let Some(j) = net.junction(&t.junction) {
            if t.bottom > j.head_min {
                v.push(Violation::new(&t.id, "bottom elevation above junction minimum head"));
            }
        }
    }

    for r in &net.reservoirs {
        if let Some(j) = net.junction(&r.junction) {
            if j.head_min != r.head || j.head_max != r.head {
                v.push(Violation::new(&r.id, "junction head bounds must pin the reservoir head"));
            }
        }
    }

    for d in &net.demands {
        if d.max_demand.len() != n {
            v.push(Violation::new(&d.id, "demand series length mismatch"));
        }
        if d.max_demand.iter().any(|&x| x < 0.0) {
            v.push(Violation::new(&d.id, "demand must be nonnegative"));
        }
    }

    ValidationReport { violations: v }
}
