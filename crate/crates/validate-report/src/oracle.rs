//! Independent hydraulic feasibility oracle.
//!
//! Evaluates every constraint family numerically, straight from the
//! [`Network`], with its own arithmetic for the nonlinear relations and no
//! code shared with the model IR, so model-construction bugs show up as
//! disagreements.

use std::collections::BTreeMap;

use thiserror::Error;
use wdn_core::Network;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("missing variable value `{0}`")]
    MissingValue(String),
}

#[derive(Debug, Clone, Copy)]
pub struct OracleTolerance {
    /// Absolute tolerance on heads, flows, gains, power.
    pub flow_head_abs: f64,
    /// Absolute tolerance on tank volumes (errors integrate over time).
    pub volume_abs: f64,
    /// How far a binary may sit from {0, 1}.
    pub binary: f64,
}

impl Default for OracleTolerance {
    fn default() -> Self {
        Self { flow_head_abs: 1e-6, volume_abs: 1e-4, binary: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleViolation {
    pub family: &'static str,
    pub element: String,
    pub time: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ViolationReport {
    pub violations: Vec<OracleViolation>,
    pub max_abs: f64,
    pub max_rel: f64,
}

impl ViolationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn families(&self) -> std::collections::BTreeSet<&'static str> {
        self.violations.iter().map(|v| v.family).collect()
    }

    fn push(&mut self, family: &'static str, element: &str, time: usize, magnitude: f64, scale: f64) {
        self.max_abs = self.max_abs.max(magnitude);
        self.max_rel = self.max_rel.max(magnitude / scale.abs().max(1.0));
        self.violations.push(OracleViolation {
            family,
            element: element.to_string(),
            time,
            magnitude,
        });
    }
}

/// Check a value map (semantic tag → value) against the full physics of the
/// network, reporting every violation beyond tolerance.
pub fn check_feasibility(
    net: &Network,
    values: &BTreeMap<String, f64>,
    tol: &OracleTolerance,
) -> Result<ViolationReport, OracleError> {
    let get = |tag: String| -> Result<f64, OracleError> {
        values.get(&tag).copied().ok_or(OracleError::MissingValue(tag))
    };
    let mut rep = ViolationReport::default();
    let nt = net.time.num_points;
    let ta = tol.flow_head_abs;
    let tv = tol.volume_abs;
    let e = net.hw_exponent;

    let mut head = vec![vec![0.0; nt]; net.junctions.len()];
    for (j, junction) in net.junctions.iter().enumerate() {
        for t in 0..nt {
            let h = get(format!("head:{}:{t}", junction.id))?;
            head[j][t] = h;
            let over = (h - junction.head_max).max(junction.head_min - h);
            if over > ta {
                rep.push("head-bounds", &junction.id, t, over, junction.head_max);
            }
        }
    }

    // net inflow accumulator per junction and time
    let mut balance = vec![vec![0.0; nt]; net.junctions.len()];

    for pipe in &net.pipes {
        let fr = net.junction_idx(&pipe.from).expect("pipe endpoints resolve");
        let to = net.junction_idx(&pipe.to).expect("pipe endpoints resolve");
        let fr_j = &net.junctions[fr];
        let to_j = &net.junctions[to];
        let cap_pos = pipe.headdiff_cap_pos.unwrap_or((fr_j.head_max - to_j.head_min).max(0.0));
        let cap_neg = pipe.headdiff_cap_neg.unwrap_or((to_j.head_max - fr_j.head_min).max(0.0));
        for t in 0..nt {
            let y = get(format!("y:{}:{t}", pipe.id))?;
            let q = get(format!("q:{}:{t}", pipe.id))?;
            let qp = get(format!("q+:{}:{t}", pipe.id))?;
            let qm = get(format!("q-:{}:{t}", pipe.id))?;
            let dhp = get(format!("dh+:{}:{t}", pipe.id))?;
            let dhm = get(format!("dh-:{}:{t}", pipe.id))?;

            if (y - y.round()).abs() > tol.binary || !(y.round() == 0.0 || y.round() == 1.0) {
                rep.push("binary", &pipe.id, t, (y - y.round()).abs().max(1.0), 1.0);
            }
            let d = (q - (qp - qm)).abs();
            if d > ta {
                rep.push("pipe-flow-split", &pipe.id, t, d, q);
            }
            let gate = [
                qp - pipe.flow_max_pos * y,
                pipe.flow_min_pos * y - qp,
                qm - pipe.flow_max_neg * (1.0 - y),
                pipe.flow_min_neg * (1.0 - y) - qm,
                -qp,
                -qm,
            ]
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
            if gate > ta {
                rep.push("pipe-flow-gate", &pipe.id, t, gate, pipe.flow_max_pos);
            }
            let hd_gate = (dhp - cap_pos * y).max(dhm - cap_neg * (1.0 - y)).max(-dhp).max(-dhm);
            if hd_gate > ta {
                rep.push("pipe-headdiff-gate", &pipe.id, t, hd_gate, cap_pos.max(cap_neg));
            }
            let link = (dhp - dhm - (head[fr][t] - head[to][t])).abs();
            if link > ta {
                rep.push("pipe-head-link", &pipe.id, t, link, dhp.max(dhm));
            }
            let rl = pipe.resistance_per_length * pipe.length;
            let loss_p = (dhp - rl * qp.max(0.0).powf(e)).abs();
            if loss_p > ta {
                rep.push("pipe-head-loss", &pipe.id, t, loss_p, dhp);
            }
            let loss_m = (dhm - rl * qm.max(0.0).powf(e)).abs();
            if loss_m > ta {
                rep.push("pipe-head-loss", &pipe.id, t, loss_m, dhm);
            }

            balance[to][t] += q;
            balance[fr][t] -= q;
        }
    }

    for pump in &net.pumps {
        let fr = net.junction_idx(&pump.from).expect("pump endpoints resolve");
        let to = net.junction_idx(&pump.to).expect("pump endpoints resolve");
        let m_up = (net.junctions[to].head_max - net.junctions[fr].head_min).max(0.0);
        let m_lo = net.junctions[to].head_min - net.junctions[fr].head_max;
        for t in 0..nt {
            let z = get(format!("z:{}:{t}", pump.id))?;
            let q = get(format!("qpu:{}:{t}", pump.id))?;
            let g = get(format!("g:{}:{t}", pump.id))?;
            let p = get(format!("pw:{}:{t}", pump.id))?;

            if (z - z.round()).abs() > tol.binary || !(z.round() == 0.0 || z.round() == 1.0) {
                rep.push("binary", &pump.id, t, (z - z.round()).abs().max(1.0), 1.0);
            }
            let gate = (pump.flow_min_on * z - q).max(q - pump.flow_max_on * z).max(-q);
            if gate > ta {
                rep.push("pump-flow-gate", &pump.id, t, gate, pump.flow_max_on);
            }
            let dh = head[to][t] - head[fr][t];
            let link = (dh - g - m_up * (1.0 - z)).max(g + m_lo * (1.0 - z) - dh);
            if link > ta {
                rep.push("pump-head-link", &pump.id, t, link, dh);
            }
            let gain = (g - (pump.alpha * q * q + pump.beta * q + pump.gamma * z)).abs();
            if gain > ta {
                rep.push("pump-head-gain", &pump.id, t, gain, g);
            }
            let power = (p - (pump.omega * q + pump.mu * z)).abs();
            if power > ta {
                rep.push("pump-power", &pump.id, t, power, p);
            }

            balance[to][t] += q;
            balance[fr][t] -= q;
        }
    }

    let dt_s = net.time.dt_seconds();
    for tank in &net.tanks {
        let j = net.junction_idx(&tank.junction).expect("tank junction resolves");
        let mut vol = vec![0.0; nt];
        for t in 0..nt {
            vol[t] = get(format!("vol:{}:{t}", tank.id))?;
            let q = get(format!("qtk:{}:{t}", tank.id))?;
            let coupling = (vol[t] - tank.area * (head[j][t] - tank.bottom)).abs();
            if coupling > tv {
                rep.push("tank-volume-head", &tank.id, t, coupling, vol[t]);
            }
            let over = (vol[t] - tank.volume_max).max(tank.volume_min - vol[t]);
            if over > tv {
                rep.push("tank-volume-bounds", &tank.id, t, over, tank.volume_max);
            }
            balance[j][t] += q;
        }
        let init = (vol[0] - tank.volume_initial).abs();
        if init > tv {
            rep.push("tank-initial", &tank.id, 0, init, tank.volume_initial);
        }
        for t in 0..nt.saturating_sub(1) {
            let q = get(format!("qtk:{}:{t}", tank.id))?;
            let update = (vol[t + 1] - (vol[t] - q * dt_s)).abs();
            if update > tv {
                rep.push("tank-volume-update", &tank.id, t, update, vol[t]);
            }
        }
    }

    for res in &net.reservoirs {
        let j = net.junction_idx(&res.junction).expect("reservoir junction resolves");
        for t in 0..nt {
            let q = get(format!("qres:{}:{t}", res.id))?;
            if -q > ta {
                rep.push("reservoir-nonneg", &res.id, t, -q, q);
            }
            balance[j][t] += q;
        }
    }

    for dem in &net.demands {
        let j = net.junction_idx(&dem.junction).expect("demand junction resolves");
        for t in 0..nt {
            let q = get(format!("qdem:{}:{t}", dem.id))?;
            let over = (q - dem.max_demand[t]).max(-q);
            if over > ta {
                rep.push("demand-cap", &dem.id, t, over, dem.max_demand[t]);
            }
            balance[j][t] -= q;
        }
    }

    for (j, junction) in net.junctions.iter().enumerate() {
        for t in 0..nt {
            let imbalance = balance[j][t].abs();
            if imbalance > ta {
                rep.push("mass-balance", &junction.id, t, imbalance, 1.0);
            }
        }
    }

    Ok(rep)
}
