//! EPANET-INP subset reader.
//!
//! Recognized sections: JUNCTIONS, RESERVOIRS, TANKS, PIPES, PUMPS, DEMANDS,
//! PATTERNS, CURVES, TIMES (TITLE and OPTIONS are read but only sanity
//! checked). Anything else is reported as a warning and skipped, never
//! silently dropped. Flows are interpreted as LPS, elevations and heads as
//! meters, diameters as millimeters.
//!
//! INP files carry elevations rather than head bounds; junction head bounds
//! come from a configured pressure window above the elevation. Pump head
//! curves are fitted to the gated quadratic; power coefficients default to
//! zero energy use unless supplied post-hoc.

use std::collections::BTreeMap;

use thiserror::Error;
use wdn_core::{
    validate_network, DemandPoint, Junction, Network, Pipe, Pump, Reservoir, Tank, TimeGrid,
};

use crate::curve_fit::{fit_pump_curve, FitError, PumpCurvePoint};

#[derive(Debug, Clone)]
pub struct InpConfig {
    /// Pressure window (m) added to junction elevations to form head bounds.
    pub pressure_min: f64,
    pub pressure_max: f64,
    /// Velocity cap (m/s) used to derive pipe flow bounds from diameters.
    pub max_velocity: f64,
}

impl Default for InpConfig {
    fn default() -> Self {
        Self { pressure_min: 0.0, pressure_max: 100.0, max_velocity: 10.0 }
    }
}

#[derive(Debug, Error)]
pub enum InpError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing mandatory section [{0}]")]
    MissingSection(&'static str),
    #[error("line {line}: unknown node `{node}`")]
    UnknownNode { line: usize, node: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("pump `{id}`: head curve `{curve}` not found")]
    MissingCurve { id: String, curve: String },
    #[error("pump `{id}`: curve fit failed: {source}")]
    CurveFit { id: String, source: FitError },
    #[error(transparent)]
    Network(#[from] wdn_core::NetworkError),
    #[error("network invalid after import:\n{0}")]
    Invalid(String),
}

/// Import result: the network plus non-fatal findings.
#[derive(Debug)]
pub struct InpImport {
    pub network: Network,
    pub warnings: Vec<String>,
}

fn parse_clock(tok: &str) -> Option<f64> {
    // "12", "12.5" or "H:MM"
    if let Some((h, m)) = tok.split_once(':') {
        let h: f64 = h.parse().ok()?;
        let m: f64 = m.parse().ok()?;
        Some(h + m / 60.0)
    } else {
        tok.parse().ok()
    }
}

struct RawNode {
    line: usize,
    elevation: f64,
    base_demand: f64,
    pattern: Option<String>,
}

pub fn parse_inp(text: &str) -> Result<InpImport, InpError> {
    parse_inp_with(text, &InpConfig::default())
}

pub fn parse_inp_with(text: &str, cfg: &InpConfig) -> Result<InpImport, InpError> {
    let mut warnings = Vec::new();
    let mut section = String::new();
    let mut seen_sections: Vec<String> = Vec::new();

    let mut junctions: BTreeMap<String, RawNode> = BTreeMap::new();
    let mut reservoirs: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    // id -> (line, elev, init, min, max, diameter)
    let mut tanks: BTreeMap<String, (usize, f64, f64, f64, f64, f64)> = BTreeMap::new();
    // id -> (line, n1, n2, length, diameter_mm, roughness)
    let mut pipes: Vec<(usize, String, String, String, f64, f64, f64)> = Vec::new();
    // id -> (line, n1, n2, curve id)
    let mut pumps: Vec<(usize, String, String, String, String)> = Vec::new();
    let mut demands: Vec<(usize, String, f64, Option<String>)> = Vec::new();
    let mut patterns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut curves: BTreeMap<String, Vec<PumpCurvePoint>> = BTreeMap::new();
    let mut duration_h = 1.0f64;
    let mut step_h = 1.0f64;

    let mut ids_seen: BTreeMap<String, ()> = BTreeMap::new();
    let mut check_unique = |id: &str| -> Result<(), InpError> {
        if ids_seen.insert(id.to_string(), ()).is_some() {
            return Err(InpError::DuplicateId(id.to_string()));
        }
        Ok(())
    };

    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = match raw.find(';') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            let name = line.trim_matches(|c| c == '[' || c == ']').to_uppercase();
            match name.as_str() {
                "JUNCTIONS" | "RESERVOIRS" | "TANKS" | "PIPES" | "PUMPS" | "DEMANDS"
                | "PATTERNS" | "CURVES" | "TIMES" | "TITLE" | "OPTIONS" | "END" => {}
                other => warnings.push(format!("section {other} ignored")),
            }
            seen_sections.push(name.clone());
            section = name;
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        let syntax = |msg: &str| InpError::Syntax { line: ln, msg: msg.to_string() };
        let num = |s: &str| -> Result<f64, InpError> {
            s.parse().map_err(|_| syntax(&format!("bad number `{s}`")))
        };
        match section.as_str() {
            "JUNCTIONS" => {
                if tok.len() < 2 {
                    return Err(syntax("expected `id elevation [demand [pattern]]`"));
                }
                check_unique(tok[0])?;
                junctions.insert(
                    tok[0].to_string(),
                    RawNode {
                        line: ln,
                        elevation: num(tok[1])?,
                        base_demand: if tok.len() > 2 { num(tok[2])? } else { 0.0 },
                        pattern: tok.get(3).map(|s| s.to_string()),
                    },
                );
            }
            "RESERVOIRS" => {
                if tok.len() < 2 {
                    return Err(syntax("expected `id head`"));
                }
                check_unique(tok[0])?;
                reservoirs.insert(tok[0].to_string(), (ln, num(tok[1])?));
            }
            "TANKS" => {
                if tok.len() < 6 {
                    return Err(syntax("expected `id elev init min max diameter`"));
                }
                check_unique(tok[0])?;
                tanks.insert(
                    tok[0].to_string(),
                    (ln, num(tok[1])?, num(tok[2])?, num(tok[3])?, num(tok[4])?, num(tok[5])?),
                );
            }
            "PIPES" => {
                if tok.len() < 6 {
                    return Err(syntax("expected `id node1 node2 length diameter roughness`"));
                }
                check_unique(tok[0])?;
                pipes.push((
                    ln,
                    tok[0].to_string(),
                    tok[1].to_string(),
                    tok[2].to_string(),
                    num(tok[3])?,
                    num(tok[4])?,
                    num(tok[5])?,
                ));
            }
            "PUMPS" => {
                if tok.len() < 4 {
                    return Err(syntax("expected `id node1 node2 HEAD curve`"));
                }
                check_unique(tok[0])?;
                match tok[3].to_uppercase().as_str() {
                    "HEAD" if tok.len() >= 5 => {
                        pumps.push((ln, tok[0].into(), tok[1].into(), tok[2].into(), tok[4].into()));
                    }
                    "POWER" => {
                        warnings.push(format!("pump {}: POWER keyword unsupported, pump skipped", tok[0]));
                    }
                    other => return Err(syntax(&format!("unsupported pump keyword `{other}`"))),
                }
            }
            "DEMANDS" => {
                if tok.len() < 2 {
                    return Err(syntax("expected `junction demand [pattern]`"));
                }
                demands.push((ln, tok[0].to_string(), num(tok[1])?, tok.get(2).map(|s| s.to_string())));
            }
            "PATTERNS" => {
                if tok.len() < 2 {
                    return Err(syntax("expected `id multipliers...`"));
                }
                let entry = patterns.entry(tok[0].to_string()).or_default();
                for t in &tok[1..] {
                    entry.push(num(t)?);
                }
            }
            "CURVES" => {
                if tok.len() < 3 {
                    return Err(syntax("expected `id x y`"));
                }
                curves
                    .entry(tok[0].to_string())
                    .or_default()
                    .push(PumpCurvePoint { q: num(tok[1])? / 1000.0, g: num(tok[2])? });
            }
            "TIMES" => {
                let joined = tok.join(" ").to_uppercase();
                if let Some(rest) = joined.strip_prefix("DURATION") {
                    duration_h = parse_clock(rest.trim()).ok_or_else(|| syntax("bad duration"))?;
                } else if let Some(rest) = joined.strip_prefix("HYDRAULIC TIMESTEP") {
                    step_h = parse_clock(rest.trim()).ok_or_else(|| syntax("bad timestep"))?;
                }
                // other TIMES options irrelevant to the subset
            }
            "TITLE" | "OPTIONS" => {}
            _ => {} // ignored section, already warned
        }
    }

    for name in ["JUNCTIONS", "RESERVOIRS", "PIPES"] {
        if !seen_sections.iter().any(|s| s == name) {
            return Err(InpError::MissingSection(match name {
                "JUNCTIONS" => "JUNCTIONS",
                "RESERVOIRS" => "RESERVOIRS",
                _ => "PIPES",
            }));
        }
    }

    let num_points = ((duration_h / step_h).round() as usize).max(1);
    let time = TimeGrid::new(num_points, step_h);

    // junction nodes from all three node sections
    let mut out_junctions = Vec::new();
    let mut out_tanks = Vec::new();
    let mut out_reservoirs = Vec::new();
    for (id, node) in &junctions {
        out_junctions.push(Junction {
            id: id.clone(),
            head_min: node.elevation + cfg.pressure_min,
            head_max: node.elevation + cfg.pressure_max,
        });
    }
    for (id, &(_, head)) in &reservoirs {
        out_junctions.push(Junction { id: id.clone(), head_min: head, head_max: head });
        out_reservoirs.push(Reservoir { id: format!("res-{id}"), junction: id.clone(), head });
    }
    for (id, &(_, elev, init, min, max, diam_m)) in &tanks {
        let area = std::f64::consts::PI * diam_m * diam_m / 4.0;
        out_junctions.push(Junction { id: id.clone(), head_min: elev + min, head_max: elev + max });
        out_tanks.push(Tank {
            id: format!("tank-{id}"),
            junction: id.clone(),
            area,
            bottom: elev,
            volume_initial: area * init,
            volume_min: area * min,
            volume_max: area * max,
        });
    }

    let node_exists = |n: &str| {
        junctions.contains_key(n) || reservoirs.contains_key(n) || tanks.contains_key(n)
    };

    let mut out_pipes = Vec::new();
    for (ln, id, n1, n2, length, diam_mm, roughness) in pipes {
        for n in [&n1, &n2] {
            if !node_exists(n) {
                return Err(InpError::UnknownNode { line: ln, node: n.clone() });
            }
        }
        let d = diam_mm / 1000.0;
        // Hazen-Williams SI resistance per unit length
        let r = 10.67 / (roughness.powf(1.852) * d.powf(4.87));
        let area = std::f64::consts::PI * d * d / 4.0;
        let qcap = cfg.max_velocity * area;
        out_pipes.push(Pipe {
            id,
            from: n1,
            to: n2,
            length,
            resistance_per_length: r,
            flow_max_pos: qcap,
            flow_min_pos: 0.0,
            flow_max_neg: qcap,
            flow_min_neg: 0.0,
            headdiff_cap_pos: None,
            headdiff_cap_neg: None,
        });
    }

    let mut out_pumps = Vec::new();
    for (ln, id, n1, n2, curve) in pumps {
        for n in [&n1, &n2] {
            if !node_exists(n) {
                return Err(InpError::UnknownNode { line: ln, node: n.clone() });
            }
        }
        let points = curves
            .get(&curve)
            .ok_or_else(|| InpError::MissingCurve { id: id.clone(), curve: curve.clone() })?;
        let fit = fit_pump_curve(points).map_err(|source| InpError::CurveFit { id: id.clone(), source })?;
        for w in &fit.warnings {
            warnings.push(format!("pump {id}: {w}"));
        }
        let q_max = points.last().unwrap().q;
        let q_min = if points[0].q > 0.0 { points[0].q } else { 0.05 * q_max };
        out_pumps.push(Pump {
            id,
            from: n1,
            to: n2,
            flow_min_on: q_min,
            flow_max_on: q_max,
            alpha: fit.alpha,
            beta: fit.beta,
            gamma: fit.gamma,
            omega: 0.0,
            mu: 0.0,
            energy_price: vec![1.0; num_points],
        });
    }

    let expand = |base: f64, pattern: &Option<String>, ln: usize| -> Result<Vec<f64>, InpError> {
        let series = match pattern {
            None => vec![base; num_points],
            Some(p) => {
                let mult = patterns.get(p).ok_or_else(|| InpError::Syntax {
                    line: ln,
                    msg: format!("pattern `{p}` not found"),
                })?;
                (0..num_points).map(|t| base * mult[t % mult.len()]).collect()
            }
        };
        // LPS to m³/s
        Ok(series.into_iter().map(|v| v / 1000.0).collect())
    };

    let mut out_demands = Vec::new();
    for (id, node) in &junctions {
        if node.base_demand > 0.0 {
            out_demands.push(DemandPoint {
                id: format!("dem-{id}"),
                junction: id.clone(),
                max_demand: expand(node.base_demand, &node.pattern, node.line)?,
            });
        }
    }
    for (i, (ln, junction, base, pattern)) in demands.iter().enumerate() {
        if !node_exists(junction) {
            return Err(InpError::UnknownNode { line: *ln, node: junction.clone() });
        }
        out_demands.push(DemandPoint {
            id: format!("dem-x{i}-{junction}"),
            junction: junction.clone(),
            max_demand: expand(*base, pattern, *ln)?,
        });
    }

    let network = Network::new(
        time,
        out_junctions,
        out_pipes,
        out_pumps,
        out_tanks,
        out_reservoirs,
        out_demands,
    )?;
    let report = validate_network(&network);
    if !report.is_valid() {
        return Err(InpError::Invalid(report.to_string()));
    }
    Ok(InpImport { network, warnings })
}
