use std::collections::BTreeMap;

use thiserror::Error;

use crate::hydraulics::HW_EXPONENT;

/// Uniform planning horizon. Time points are addressed internally by the
/// offset `0..num_points`; `first_index` only affects reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    /// Number of time points in the horizon.
    pub num_points: usize,
    /// Duration of one step in hours.
    pub dt_hours: f64,
    /// Index of the first time point (reporting only, conventionally 1).
    pub first_index: usize,
}

impl TimeGrid {
    pub fn new(num_points: usize, dt_hours: f64) -> Self {
        Self { num_points, dt_hours, first_index: 1 }
    }

    /// Index of the final time point.
    pub fn final_index(&self) -> usize {
        self.first_index + self.num_points.saturating_sub(1)
    }

    /// Step duration in seconds, used by the tank volume update
    /// (flows are m³/s while the grid is specified in hours).
    pub fn dt_seconds(&self) -> f64 {
        self.dt_hours * 3600.0
    }

    /// Iterator over internal time offsets.
    pub fn steps(&self) -> std::ops::Range<usize> {
        0..self.num_points
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Junction {
    pub id: String,
    /// Lower bound on total hydraulic head (m).
    pub head_min: f64,
    /// Upper bound on total hydraulic head (m).
    pub head_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pipe {
    pub id: String,
    pub from: String,
    pub to: String,
    /// Length (m).
    pub length: f64,
    /// Resistance per unit length; together with the length this scales the
    /// Hazen-Williams head loss `r·L·q^e`.
    pub resistance_per_length: f64,
    /// Flow bounds per direction (m³/s). Lower bounds default to zero.
    pub flow_max_pos: f64,
    pub flow_min_pos: f64,
    pub flow_max_neg: f64,
    pub flow_min_neg: f64,
    /// Optional explicit caps on the head difference per direction (m);
    /// when absent they are derived from the junction head bounds.
    pub headdiff_cap_pos: Option<f64>,
    pub headdiff_cap_neg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pump {
    pub id: String,
    pub from: String,
    pub to: String,
    /// Flow bounds while the pump is active (m³/s); both strictly positive.
    pub flow_min_on: f64,
    pub flow_max_on: f64,
    /// Head gain coefficients: `g = alpha·q² + beta·q + gamma·z`,
    /// with `alpha < 0` and `gamma > 0`.
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Power coefficients: `P = omega·q + mu·z` (kW).
    pub omega: f64,
    pub mu: f64,
    /// Energy price per time point (currency/kWh), length `num_points`.
    pub energy_price: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tank {
    pub id: String,
    pub junction: String,
    /// Cross-sectional area (m²); tanks are cylindrical.
    pub area: f64,
    /// Elevation of the tank bottom (m).
    pub bottom: f64,
    pub volume_initial: f64,
    pub volume_min: f64,
    pub volume_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reservoir {
    pub id: String,
    pub junction: String,
    /// Constant head (m); the attached junction must pin its head bounds
    /// to this value.
    pub head: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandPoint {
    pub id: String,
    pub junction: String,
    /// Maximum withdrawal rate per time point (m³/s), length `num_points`.
    pub max_demand: Vec<f64>,
}

/// Components incident to one junction, split by orientation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JunctionIncidence {
    /// Pipes with `to == junction`.
    pub pipes_in: Vec<usize>,
    /// Pipes with `from == junction`.
    pub pipes_out: Vec<usize>,
    /// Pumps with `to == junction`.
    pub pumps_in: Vec<usize>,
    /// Pumps with `from == junction`.
    pub pumps_out: Vec<usize>,
    pub tanks: Vec<usize>,
    pub reservoirs: Vec<usize>,
    pub demands: Vec<usize>,
}

/// Reference to an arc (pipe or pump) by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcRef {
    Pipe(usize),
    Pump(usize),
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("{element}: unknown junction `{junction}`")]
    UnknownJunction { element: String, junction: String },
    #[error("unknown arc `{0}`")]
    UnknownArc(String),
}

/// Immutable network model. All ids resolve and incidence maps are
/// consistent with the element endpoint fields by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub time: TimeGrid,
    pub junctions: Vec<Junction>,
    pub pipes: Vec<Pipe>,
    pub pumps: Vec<Pump>,
    pub tanks: Vec<Tank>,
    pub reservoirs: Vec<Reservoir>,
    pub demands: Vec<DemandPoint>,
    /// Hazen-Williams exponent, 1.852 unless overridden.
    pub hw_exponent: f64,
    junction_index: BTreeMap<String, usize>,
    arc_index: BTreeMap<String, ArcRef>,
    incidence: Vec<JunctionIncidence>,
}

impl Network {
    pub fn new(
        time: TimeGrid,
        junctions: Vec<Junction>,
        pipes: Vec<Pipe>,
        pumps: Vec<Pump>,
        tanks: Vec<Tank>,
        reservoirs: Vec<Reservoir>,
        demands: Vec<DemandPoint>,
    ) -> Result<Self, NetworkError> {
        let mut junction_index = BTreeMap::new();
        for (i, j) in junctions.iter().enumerate() {
            if junction_index.insert(j.id.clone(), i).is_some() {
                return Err(NetworkError::DuplicateId(j.id.clone()));
            }
        }
        let mut arc_index = BTreeMap::new();
        for (i, p) in pipes.iter().enumerate() {
            if arc_index.insert(p.id.clone(), ArcRef::Pipe(i)).is_some() {
                return Err(NetworkError::DuplicateId(p.id.clone()));
            }
        }
        for (i, p) in pumps.iter().enumerate() {
            if arc_index.insert(p.id.clone(), ArcRef::Pump(i)).is_some() {
                return Err(NetworkError::DuplicateId(p.id.clone()));
            }
        }
        if let Some(dup) = duplicate_id(tanks.iter().map(|t| t.id.as_str()))
            .or(duplicate_id(reservoirs.iter().map(|r| r.id.as_str())))
            .or(duplicate_id(demands.iter().map(|d| d.id.as_str())))
        {
            return Err(NetworkError::DuplicateId(dup));
        }

        let resolve = |element: &str, junction: &str| -> Result<usize, NetworkError> {
            junction_index.get(junction).copied().ok_or_else(|| NetworkError::UnknownJunction {
                element: element.to_string(),
                junction: junction.to_string(),
            })
        };

        let mut incidence = vec![JunctionIncidence::default(); junctions.len()];
        for (i, p) in pipes.iter().enumerate() {
            incidence[resolve(&p.id, &p.from)?].pipes_out.push(i);
            incidence[resolve(&p.id, &p.to)?].pipes_in.push(i);
        }
        for (i, p) in pumps.iter().enumerate() {
            incidence[resolve(&p.id, &p.from)?].pumps_out.push(i);
            incidence[resolve(&p.id, &p.to)?].pumps_in.push(i);
        }
        for (i, t) in tanks.iter().enumerate() {
            incidence[resolve(&t.id, &t.junction)?].tanks.push(i);
        }
        for (i, r) in reservoirs.iter().enumerate() {
            incidence[resolve(&r.id, &r.junction)?].reservoirs.push(i);
        }
        for (i, d) in demands.iter().enumerate() {
            incidence[resolve(&d.id, &d.junction)?].demands.push(i);
        }

        Ok(Self {
            time,
            junctions,
            pipes,
            pumps,
            tanks,
            reservoirs,
            demands,
            hw_exponent: HW_EXPONENT,
            junction_index,
            arc_index,
            incidence,
        })
    }

    pub fn with_hw_exponent(mut self, exponent: f64) -> Self {
        self.hw_exponent = exponent;
        self
    }

    pub fn junction_idx(&self, id: &str) -> Option<usize> {
        self.junction_index.get(id).copied()
    }

    pub fn junction(&self, id: &str) -> Option<&Junction> {
        self.junction_idx(id).map(|i| &self.junctions[i])
    }

    pub fn arc(&self, id: &str) -> Option<ArcRef> {
        self.arc_index.get(id).copied()
    }

    /// Incidence entry of a junction by index.
    pub fn incidence(&self, junction_idx: usize) -> &JunctionIncidence {
        &self.incidence[junction_idx]
    }

    /// Endpoint junction indices `(from, to)` of an arc.
    pub fn arc_endpoints(&self, arc: ArcRef) -> (usize, usize) {
        let (from, to) = match arc {
            ArcRef::Pipe(i) => (&self.pipes[i].from, &self.pipes[i].to),
            ArcRef::Pump(i) => (&self.pumps[i].from, &self.pumps[i].to),
        };
        (self.junction_index[from], self.junction_index[to])
    }
}

fn duplicate_id<'a>(ids: impl Iterator<Item = &'a str>) -> Option<String> {
    let mut seen = BTreeMap::new();
    for id in ids {
        if seen.insert(id, ()).is_some() {
            return Some(id.to_string());
        }
    }
    None
}
