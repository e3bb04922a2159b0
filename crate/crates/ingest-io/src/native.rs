//! Native JSON instance format, version 1.
//!
//! Field names carry units. The writer is deterministic: fixed key order,
//! floats at 17 significant digits, optionals omitted when empty, so
//! `write ∘ parse` is a fixpoint and `parse ∘ write` is the identity on the
//! data model.

use std::collections::BTreeMap;

use serde::Deserialize;
use thiserror::Error;
use wdn_core::{
    validate_network, DemandPoint, Junction, Network, Pipe, Pump, Reservoir, Tank, TimeGrid,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum NativeError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown schema version {0} (supported: {SCHEMA_VERSION})")]
    UnknownSchemaVersion(u32),
    #[error("pump {id}: missing field {field}")]
    MissingPumpField { id: String, field: &'static str },
    #[error("{element}: tariff series length {got} does not match {want} time points")]
    TariffLength { element: String, got: usize, want: usize },
    #[error(transparent)]
    Network(#[from] wdn_core::NetworkError),
    #[error("invalid network:\n{0}")]
    Invalid(String),
}

#[derive(Deserialize)]
struct DocDto {
    schema_version: u32,
    network: NetworkDto,
    #[serde(default)]
    scenario: Option<ScenarioDto>,
}

#[derive(Deserialize)]
struct NetworkDto {
    #[serde(default)]
    hw_exponent: Option<f64>,
    time: TimeDto,
    #[serde(default)]
    junctions: Vec<JunctionDto>,
    #[serde(default)]
    pipes: Vec<PipeDto>,
    #[serde(default)]
    pumps: Vec<PumpDto>,
    #[serde(default)]
    tanks: Vec<TankDto>,
    #[serde(default)]
    reservoirs: Vec<ReservoirDto>,
    #[serde(default)]
    demands: Vec<DemandDto>,
}

#[derive(Deserialize)]
struct TimeDto {
    num_points: usize,
    dt_hours: f64,
    #[serde(default)]
    first_index: Option<usize>,
}

#[derive(Deserialize)]
struct JunctionDto {
    id: String,
    head_min_m: f64,
    head_max_m: f64,
}

#[derive(Deserialize)]
struct PipeDto {
    id: String,
    from: String,
    to: String,
    length_m: f64,
    resistance_per_m: f64,
    flow_max_pos_m3s: f64,
    #[serde(default)]
    flow_min_pos_m3s: f64,
    flow_max_neg_m3s: f64,
    #[serde(default)]
    flow_min_neg_m3s: f64,
    #[serde(default)]
    headdiff_cap_pos_m: Option<f64>,
    #[serde(default)]
    headdiff_cap_neg_m: Option<f64>,
}

#[derive(Deserialize)]
struct PumpDto {
    id: String,
    from: String,
    to: String,
    flow_min_on_m3s: Option<f64>,
    flow_max_on_m3s: Option<f64>,
    head_alpha: Option<f64>,
    head_beta: Option<f64>,
    head_gamma: Option<f64>,
    #[serde(default)]
    power_omega: Option<f64>,
    #[serde(default)]
    power_mu: Option<f64>,
}

#[derive(Deserialize)]
struct TankDto {
    id: String,
    junction: String,
    area_m2: f64,
    bottom_m: f64,
    volume_initial_m3: f64,
    volume_min_m3: f64,
    volume_max_m3: f64,
}

#[derive(Deserialize)]
struct ReservoirDto {
    id: String,
    junction: String,
    head_m: f64,
}

#[derive(Deserialize)]
struct DemandDto {
    id: String,
    junction: String,
    max_demand_m3s: Vec<f64>,
}

#[derive(Deserialize)]
struct ScenarioDto {
    #[serde(default)]
    tariffs: BTreeMap<String, Vec<f64>>,
}

/// Parse a native document into a validated network.
pub fn parse_native(text: &str) -> Result<Network, NativeError> {
    let doc: DocDto = serde_json::from_str(text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(NativeError::UnknownSchemaVersion(doc.schema_version));
    }
    let nd = doc.network;
    let time = TimeGrid {
        num_points: nd.time.num_points,
        dt_hours: nd.time.dt_hours,
        first_index: nd.time.first_index.unwrap_or(1),
    };
    let nt = time.num_points;

    let tariffs = doc.scenario.map(|s| s.tariffs).unwrap_or_default();
    let mut pumps = Vec::with_capacity(nd.pumps.len());
    for p in nd.pumps {
        let field = |v: Option<f64>, field: &'static str, id: &str| {
            v.ok_or_else(|| NativeError::MissingPumpField { id: id.to_string(), field })
        };
        let energy_price = match tariffs.get(&p.id) {
            Some(series) => {
                if series.len() != nt {
                    return Err(NativeError::TariffLength {
                        element: p.id.clone(),
                        got: series.len(),
                        want: nt,
                    });
                }
                series.clone()
            }
            None => vec![1.0; nt],
        };
        pumps.push(Pump {
            flow_min_on: field(p.flow_min_on_m3s, "flow_min_on_m3s", &p.id)?,
            flow_max_on: field(p.flow_max_on_m3s, "flow_max_on_m3s", &p.id)?,
            alpha: field(p.head_alpha, "head_alpha", &p.id)?,
            beta: field(p.head_beta, "head_beta", &p.id)?,
            gamma: field(p.head_gamma, "head_gamma", &p.id)?,
            omega: p.power_omega.unwrap_or(1.0),
            mu: p.power_mu.unwrap_or(0.0),
            energy_price,
            id: p.id,
            from: p.from,
            to: p.to,
        });
    }

    let net = Network::new(
        time,
        nd.junctions
            .into_iter()
            .map(|j| Junction { id: j.id, head_min: j.head_min_m, head_max: j.head_max_m })
            .collect(),
        nd.pipes
            .into_iter()
            .map(|p| Pipe {
                id: p.id,
                from: p.from,
                to: p.to,
                length: p.length_m,
                resistance_per_length: p.resistance_per_m,
                flow_max_pos: p.flow_max_pos_m3s,
                flow_min_pos: p.flow_min_pos_m3s,
                flow_max_neg: p.flow_max_neg_m3s,
                flow_min_neg: p.flow_min_neg_m3s,
                headdiff_cap_pos: p.headdiff_cap_pos_m,
                headdiff_cap_neg: p.headdiff_cap_neg_m,
            })
            .collect(),
        pumps,
        nd.tanks
            .into_iter()
            .map(|t| Tank {
                id: t.id,
                junction: t.junction,
                area: t.area_m2,
                bottom: t.bottom_m,
                volume_initial: t.volume_initial_m3,
                volume_min: t.volume_min_m3,
                volume_max: t.volume_max_m3,
            })
            .collect(),
        nd.reservoirs
            .into_iter()
            .map(|r| Reservoir { id: r.id, junction: r.junction, head: r.head_m })
            .collect(),
        nd.demands
            .into_iter()
            .map(|d| DemandPoint { id: d.id, junction: d.junction, max_demand: d.max_demand_m3s })
            .collect(),
    )?;
    let net = match nd.hw_exponent {
        Some(e) => net.with_hw_exponent(e),
        None => net,
    };
    let report = validate_network(&net);
    if !report.is_valid() {
        return Err(NativeError::Invalid(report.to_string()));
    }
    Ok(net)
}

fn fmt_f64(v: f64) -> String {
    // 17 significant digits: enough for exact f64 round-trips
    let s = format!("{v:.16e}");
    s
}

struct Emitter {
    out: String,
    indent: usize,
}

impl Emitter {
    fn line(&mut self, text: &str) {
        for _ in 0..self.indent {
            self.out.push(' ');
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn obj<F: FnOnce(&mut Self)>(&mut self, prefix: &str, body: F, suffix: &str) {
        self.line(&format!("{prefix}{{"));
        self.indent += 2;
        body(self);
        self.indent -= 2;
        self.line(&format!("}}{suffix}"));
    }

    fn trim_trailing_comma(&mut self) {
        let t = self.out.trim_end_matches('\n');
        if t.ends_with(',') {
            let cut = t.len() - 1;
            self.out.replace_range(cut.., "\n");
        }
    }
}

fn field_str(e: &mut Emitter, key: &str, v: &str) {
    e.line(&format!("\"{key}\": {},", serde_json::to_string(v).unwrap()));
}

fn field_num(e: &mut Emitter, key: &str, v: f64) {
    e.line(&format!("\"{key}\": {},", fmt_f64(v)));
}

fn field_int(e: &mut Emitter, key: &str, v: usize) {
    e.line(&format!("\"{key}\": {v},"));
}

fn field_series(e: &mut Emitter, key: &str, vs: &[f64]) {
    let body: Vec<String> = vs.iter().map(|&v| fmt_f64(v)).collect();
    e.line(&format!("\"{key}\": [{}],", body.join(", ")));
}

/// Deterministic serialization of a network (plus its tariffs) in the
/// native format. Two calls on equal networks are byte-identical.
pub fn write_native(net: &Network) -> String {
    let mut e = Emitter { out: String::new(), indent: 0 };
    e.obj("", |e| {
        field_int(e, "schema_version", SCHEMA_VERSION as usize);
        e.obj("\"network\": ", |e| {
            field_num(e, "hw_exponent", net.hw_exponent);
            e.obj("\"time\": ", |e| {
                field_int(e, "num_points", net.time.num_points);
                field_num(e, "dt_hours", net.time.dt_hours);
                field_int(e, "first_index", net.time.first_index);
                e.trim_trailing_comma();
            }, ",");
            let array = |e: &mut Emitter, key: &str, n: usize, mut item: Box<dyn FnMut(&mut Emitter, usize) + '_>| {
                if n == 0 {
                    e.line(&format!("\"{key}\": [],"));
                    return;
                }
                e.line(&format!("\"{key}\": ["));
                e.indent += 2;
                for i in 0..n {
                    item(e, i);
                }
                e.trim_trailing_comma();
                e.indent -= 2;
                e.line("],");
            };
            array(e, "junctions", net.junctions.len(), Box::new(|e, i| {
                let j = &net.junctions[i];
                e.obj("", |e| {
                    field_str(e, "id", &j.id);
                    field_num(e, "head_min_m", j.head_min);
                    field_num(e, "head_max_m", j.head_max);
                    e.trim_trailing_comma();
                }, ",");
            }));
            array(e, "pipes", net.pipes.len(), Box::new(|e, i| {
                let p = &net.pipes[i];
                e.obj("", |e| {
                    field_str(e, "id", &p.id);
                    field_str(e, "from", &p.from);
                    field_str(e, "to", &p.to);
                    field_num(e, "length_m", p.length);
                    field_num(e, "resistance_per_m", p.resistance_per_length);
                    field_num(e, "flow_max_pos_m3s", p.flow_max_pos);
                    field_num(e, "flow_min_pos_m3s", p.flow_min_pos);
                    field_num(e, "flow_max_neg_m3s", p.flow_max_neg);
                    field_num(e, "flow_min_neg_m3s", p.flow_min_neg);
                    if let Some(c) = p.headdiff_cap_pos {
                        field_num(e, "headdiff_cap_pos_m", c);
                    }
                    if let Some(c) = p.headdiff_cap_neg {
                        field_num(e, "headdiff_cap_neg_m", c);
                    }
                    e.trim_trailing_comma();
                }, ",");
            }));
            array(e, "pumps", net.pumps.len(), Box::new(|e, i| {
                let p = &net.pumps[i];
                e.obj("", |e| {
                    field_str(e, "id", &p.id);
                    field_str(e, "from", &p.from);
                    field_str(e, "to", &p.to);
                    field_num(e, "flow_min_on_m3s", p.flow_min_on);
                    field_num(e, "flow_max_on_m3s", p.flow_max_on);
                    field_num(e, "head_alpha", p.alpha);
                    field_num(e, "head_beta", p.beta);
                    field_num(e, "head_gamma", p.gamma);
                    field_num(e, "power_omega", p.omega);
                    field_num(e, "power_mu", p.mu);
                    e.trim_trailing_comma();
                }, ",");
            }));
            array(e, "tanks", net.tanks.len(), Box::new(|e, i| {
                let t = &net.tanks[i];
                e.obj("", |e| {
                    field_str(e, "id", &t.id);
                    field_str(e, "junction", &t.junction);
                    field_num(e, "area_m2", t.area);
                    field_num(e, "bottom_m", t.bottom);
                    field_num(e, "volume_initial_m3", t.volume_initial);
                    field_num(e, "volume_min_m3", t.volume_min);
                    field_num(e, "volume_max_m3", t.volume_max);
                    e.trim_trailing_comma();
                }, ",");
            }));
            array(e, "reservoirs", net.reservoirs.len(), Box::new(|e, i| {
                let r = &net.reservoirs[i];
                e.obj("", |e| {
                    field_str(e, "id", &r.id);
                    field_str(e, "junction", &r.junction);
                    field_num(e, "head_m", r.head);
                    e.trim_trailing_comma();
                }, ",");
            }));
            array(e, "demands", net.demands.len(), Box::new(|e, i| {
                let d = &net.demands[i];
                e.obj("", |e| {
                    field_str(e, "id", &d.id);
                    field_str(e, "junction", &d.junction);
                    field_series(e, "max_demand_m3s", &d.max_demand);
                    e.trim_trailing_comma();
                }, ",");
            }));
            e.trim_trailing_comma();
        }, ",");
        if !net.pumps.is_empty() {
            e.obj("\"scenario\": ", |e| {
                e.obj("\"tariffs\": ", |e| {
                    // pump ids are unique; order by id for determinism
                    let mut ids: Vec<&Pump> = net.pumps.iter().collect();
                    ids.sort_by(|a, b| a.id.cmp(&b.id));
                    for p in ids {
                        field_series(e, &p.id, &p.energy_price);
                    }
                    e.trim_trailing_comma();
                }, "");
            }, ",");
        }
        e.trim_trailing_comma();
    }, "");
    e.out
}
