use std::collections::BTreeSet;

use wdn_core::{derive_head_difference_bounds, validate_network, Network};

use crate::ir::*;

const INF: f64 = f64::INFINITY;

/// Build the demand-maximization model: all constraint families over the
/// network with the pipe head-loss and pump head-gain relations kept as
/// nonlinear terms, objective `max` total withdrawal.
///
/// Per pipe and time point: direction binary, directional flows, net-flow
/// identity, direction-gated flow and head-difference bounds, head linking,
/// and two signed-power terms. Per pump and time point: activation binary,
/// gated flow bounds, head linking with big-M from the junction head bounds,
/// one quadratic head-gain term, and the affine power constraint. Tanks
/// couple volume to head linearly and evolve over consecutive time points.
pub fn build_n1(net: &Network) -> Result<ModelIR, ModelError> {
    let report = validate_network(net);
    if !report.is_valid() {
        return Err(ModelError::InvalidNetwork(report.to_string()));
    }

    let mut m = ModelIR::new("n1", Sense::Maximize, Provenance::N1);
    let nt = net.time.num_points;

    // Variables, grouped by element so tags of one element stay adjacent.
    let head: Vec<Vec<VarId>> = net
        .junctions
        .iter()
        .map(|j| {
            (0..nt)
                .map(|t| m.add_var(format!("head:{}:{t}", j.id), VarKind::Continuous, j.head_min, j.head_max))
                .collect()
        })
        .collect();

    struct PipeVars {
        y: Vec<VarId>,
        q: Vec<VarId>,
        qp: Vec<VarId>,
        qm: Vec<VarId>,
        dhp: Vec<VarId>,
        dhm: Vec<VarId>,
    }
    let mut pipe_vars = Vec::new();
    for p in &net.pipes {
        let caps = derive_head_difference_bounds(net, &p.id).expect("pipe endpoints resolve");
        let mut pv = PipeVars { y: vec![], q: vec![], qp: vec![], qm: vec![], dhp: vec![], dhm: vec![] };
        for t in 0..nt {
            pv.y.push(m.add_var(format!("y:{}:{t}", p.id), VarKind::Binary, 0.0, 1.0));
            pv.q.push(m.add_var(format!("q:{}:{t}", p.id), VarKind::Continuous, -p.flow_max_neg, p.flow_max_pos));
            pv.qp.push(m.add_var(format!("q+:{}:{t}", p.id), VarKind::Continuous, 0.0, p.flow_max_pos));
            pv.qm.push(m.add_var(format!("q-:{}:{t}", p.id), VarKind::Continuous, 0.0, p.flow_max_neg));
            pv.dhp.push(m.add_var(format!("dh+:{}:{t}", p.id), VarKind::Continuous, 0.0, caps.dh_plus_max));
            pv.dhm.push(m.add_var(format!("dh-:{}:{t}", p.id), VarKind::Continuous, 0.0, caps.dh_minus_max));
        }
        pipe_vars.push(pv);
    }

    struct PumpVars {
        z: Vec<VarId>,
        q: Vec<VarId>,
        g: Vec<VarId>,
        pw: Vec<VarId>,
    }
    let mut pump_vars = Vec::new();
    for p in &net.pumps {
        let mut pv = PumpVars { z: vec![], q: vec![], g: vec![], pw: vec![] };
        for t in 0..nt {
            pv.z.push(m.add_var(format!("z:{}:{t}", p.id), VarKind::Binary, 0.0, 1.0));
            pv.q.push(m.add_var(format!("qpu:{}:{t}", p.id), VarKind::Continuous, 0.0, p.flow_max_on));
            pv.g.push(m.add_var(format!("g:{}:{t}", p.id), VarKind::Continuous, 0.0, INF));
            pv.pw.push(m.add_var(format!("pw:{}:{t}", p.id), VarKind::Continuous, -INF, INF));
        }
        pump_vars.push(pv);
    }

    let mut tank_vol = Vec::new();
    let mut tank_q = Vec::new();
    for tk in &net.tanks {
        tank_vol.push(
            (0..nt)
                .map(|t| m.add_var(format!("vol:{}:{t}", tk.id), VarKind::Continuous, tk.volume_min, tk.volume_max))
                .collect::<Vec<_>>(),
        );
        tank_q.push(
            (0..nt)
                .map(|t| m.add_var(format!("qtk:{}:{t}", tk.id), VarKind::Continuous, -INF, INF))
                .collect::<Vec<_>>(),
        );
    }

    let res_q: Vec<Vec<VarId>> = net
        .reservoirs
        .iter()
        .map(|r| {
            (0..nt)
                .map(|t| m.add_var(format!("qres:{}:{t}", r.id), VarKind::Continuous, 0.0, INF))
                .collect()
        })
        .collect();

    let dem_q: Vec<Vec<VarId>> = net
        .demands
        .iter()
        .map(|d| {
            (0..nt)
                .map(|t| m.add_var(format!("qdem:{}:{t}", d.id), VarKind::Continuous, 0.0, d.max_demand[t]))
                .collect()
        })
        .collect();

    // Pipe constraints.
    for (i, p) in net.pipes.iter().enumerate() {
        let pv = &pipe_vars[i];
        let caps = derive_head_difference_bounds(net, &p.id).expect("pipe endpoints resolve");
        let (fr, to) = net.arc_endpoints(wdn_core::ArcRef::Pipe(i));
        for t in 0..nt {
            m.add_constraint(
                format!("flowsplit:{}:{t}", p.id),
                vec![(pv.q[t], 1.0), (pv.qp[t], -1.0), (pv.qm[t], 1.0)],
                Cmp::Eq,
                0.0,
            );
            // q+ <= qmax+ y ; q+ >= qmin+ y ; q- <= qmax- (1-y) ; q- >= qmin- (1-y)
            m.add_constraint(
                format!("qgate+ub:{}:{t}", p.id),
                vec![(pv.qp[t], 1.0), (pv.y[t], -p.flow_max_pos)],
                Cmp::Le,
                0.0,
            );
            m.add_constraint(
                format!("qgate+lb:{}:{t}", p.id),
                vec![(pv.qp[t], 1.0), (pv.y[t], -p.flow_min_pos)],
                Cmp::Ge,
                0.0,
            );
            m.add_constraint(
                format!("qgate-ub:{}:{t}", p.id),
                vec![(pv.qm[t], 1.0), (pv.y[t], p.flow_max_neg)],
                Cmp::Le,
                p.flow_max_neg,
            );
            m.add_constraint(
                format!("qgate-lb:{}:{t}", p.id),
                vec![(pv.qm[t], 1.0), (pv.y[t], p.flow_min_neg)],
                Cmp::Ge,
                p.flow_min_neg,
            );
            // dh+ <= cap+ y ; dh- <= cap- (1-y)
            m.add_constraint(
                format!("dhgate+:{}:{t}", p.id),
                vec![(pv.dhp[t], 1.0), (pv.y[t], -caps.dh_plus_max)],
                Cmp::Le,
                0.0,
            );
            m.add_constraint(
                format!("dhgate-:{}:{t}", p.id),
                vec![(pv.dhm[t], 1.0), (pv.y[t], caps.dh_minus_max)],
                Cmp::Le,
                caps.dh_minus_max,
            );
            // dh+ - dh- = h_fr - h_to
            m.add_constraint(
                format!("headlink:{}:{t}", p.id),
                vec![(pv.dhp[t], 1.0), (pv.dhm[t], -1.0), (head[fr][t], -1.0), (head[to][t], 1.0)],
                Cmp::Eq,
                0.0,
            );
        }
    }

    // Pump constraints.
    for (i, p) in net.pumps.iter().enumerate() {
        let pv = &pump_vars[i];
        let caps = derive_head_difference_bounds(net, &p.id).expect("pump endpoints resolve");
        let (fr, to) = net.arc_endpoints(wdn_core::ArcRef::Pump(i));
        for t in 0..nt {
            m.add_constraint(
                format!("pugate-lb:{}:{t}", p.id),
                vec![(pv.q[t], 1.0), (pv.z[t], -p.flow_min_on)],
                Cmp::Ge,
                0.0,
            );
            m.add_constraint(
                format!("pugate-ub:{}:{t}", p.id),
                vec![(pv.q[t], 1.0), (pv.z[t], -p.flow_max_on)],
                Cmp::Le,
                0.0,
            );
            // h_to - h_fr <= g + M̄(1-z), h_to - h_fr >= g + M̲(1-z)
            m.add_constraint(
                format!("puhead-ub:{}:{t}", p.id),
                vec![(head[to][t], 1.0), (head[fr][t], -1.0), (pv.g[t], -1.0), (pv.z[t], caps.dh_minus_max)],
                Cmp::Le,
                caps.dh_minus_max,
            );
            m.add_constraint(
                format!("puhead-lb:{}:{t}", p.id),
                vec![(head[to][t], 1.0), (head[fr][t], -1.0), (pv.g[t], -1.0), (pv.z[t], caps.dh_minus_min)],
                Cmp::Ge,
                caps.dh_minus_min,
            );
            // P = omega q + mu z
            m.add_constraint(
                format!("pupower:{}:{t}", p.id),
                vec![(pv.pw[t], 1.0), (pv.q[t], -p.omega), (pv.z[t], -p.mu)],
                Cmp::Eq,
                0.0,
            );
        }
    }

    // Tank constraints.
    let dt_s = net.time.dt_seconds();
    for (i, tk) in net.tanks.iter().enumerate() {
        let j = net.junction_idx(&tk.junction).expect("tank junction resolves");
        for t in 0..nt {
            // V = A (h - b)
            m.add_constraint(
                format!("tkhead:{}:{t}", tk.id),
                vec![(tank_vol[i][t], 1.0), (head[j][t], -tk.area)],
                Cmp::Eq,
                -tk.area * tk.bottom,
            );
        }
        m.add_constraint(
            format!("tkinit:{}", tk.id),
            vec![(tank_vol[i][0], 1.0)],
            Cmp::Eq,
            tk.volume_initial,
        );
        for t in 0..nt.saturating_sub(1) {
            // V_{t+1} = V_t - q dt
            m.add_constraint(
                format!("tkupdate:{}:{t}", tk.id),
                vec![(tank_vol[i][t + 1], 1.0), (tank_vol[i][t], -1.0), (tank_q[i][t], dt_s)],
                Cmp::Eq,
                0.0,
            );
        }
    }

    // Junction mass conservation: net inflow equals zero.
    for (j, junction) in net.junctions.iter().enumerate() {
        let inc = net.incidence(j);
        for t in 0..nt {
            let mut terms: Vec<(VarId, f64)> = Vec::new();
            for &pi in &inc.pipes_in {
                terms.push((pipe_vars[pi].q[t], 1.0));
            }
            for &pi in &inc.pipes_out {
                terms.push((pipe_vars[pi].q[t], -1.0));
            }
            for &pi in &inc.pumps_in {
                terms.push((pump_vars[pi].q[t], 1.0));
            }
            for &pi in &inc.pumps_out {
                terms.push((pump_vars[pi].q[t], -1.0));
            }
            for &ti in &inc.tanks {
                terms.push((tank_q[ti][t], 1.0));
            }
            for &ri in &inc.reservoirs {
                terms.push((res_q[ri][t], 1.0));
            }
            for &di in &inc.demands {
                terms.push((dem_q[di][t], -1.0));
            }
            if !terms.is_empty() {
                m.add_constraint(format!("balance:{}:{t}", junction.id), terms, Cmp::Eq, 0.0);
            }
        }
    }

    // Nonlinear terms: two signed powers per pipe·time, one quadratic per pump·time.
    for (i, p) in net.pipes.iter().enumerate() {
        let pv = &pipe_vars[i];
        let scale = p.resistance_per_length * p.length;
        for t in 0..nt {
            m.nonlinear.push(NonlinearTerm {
                id: format!("hw+:{}:{t}", p.id),
                group: format!("hw+:{}", p.id),
                kind: TermKind::SignedPower { base: pv.qp[t], out: pv.dhp[t], exponent: net.hw_exponent, scale },
                dom_lo: 0.0,
                dom_hi: p.flow_max_pos,
            });
            m.nonlinear.push(NonlinearTerm {
                id: format!("hw-:{}:{t}", p.id),
                group: format!("hw-:{}", p.id),
                kind: TermKind::SignedPower { base: pv.qm[t], out: pv.dhm[t], exponent: net.hw_exponent, scale },
                dom_lo: 0.0,
                dom_hi: p.flow_max_neg,
            });
        }
    }
    for (i, p) in net.pumps.iter().enumerate() {
        let pv = &pump_vars[i];
        for t in 0..nt {
            m.nonlinear.push(NonlinearTerm {
                id: format!("hg:{}:{t}", p.id),
                group: format!("hg:{}", p.id),
                kind: TermKind::Quadratic {
                    q: pv.q[t],
                    z: pv.z[t],
                    out: pv.g[t],
                    alpha: p.alpha,
                    beta: p.beta,
                    gamma: p.gamma,
                },
                dom_lo: p.flow_min_on,
                dom_hi: p.flow_max_on,
            });
        }
    }

    // Objective: total demand satisfied.
    for dv in &dem_q {
        for &id in dv {
            m.objective.terms.push((id, 1.0));
        }
    }

    Ok(m)
}

/// Fix every binary of `m` to its value in the assignment, keeping the
/// nonlinear terms; the result is the NLP restriction of the model.
pub fn fix_integers(m: &ModelIR, assignment: &Assignment) -> Result<ModelIR, ModelError> {
    let mut out = m.clone();
    let binaries: Vec<VarId> = out.binary_ids().collect();
    for id in binaries {
        let name = out.var(id).name.clone();
        let value = *assignment
            .get(&name)
            .ok_or(ModelError::MissingBinary(name))?;
        out.fix_var(id, if value { 1.0 } else { 0.0 });
    }
    out.provenance = Provenance::N1Fixed;
    out.name = format!("{}-fixed", m.name);
    Ok(out)
}

/// Add the Hamming-distance row over `subset`: the number of component-wise
/// deviations from the candidate must equal `h`. Binaries carried by the
/// candidate but outside the subset are fixed to their candidate values.
pub fn add_hamming_constraint(
    m: &ModelIR,
    candidate: &Assignment,
    subset: &BTreeSet<String>,
    h: usize,
) -> Result<ModelIR, ModelError> {
    if h > subset.len() {
        return Err(ModelError::HammingOutOfRange { h, max: subset.len() });
    }
    let mut out = m.clone();
    let mut terms = Vec::new();
    let mut rhs = h as f64;
    for name in subset {
        let id = out.var_id(name).ok_or_else(|| ModelError::UnknownVar(name.clone()))?;
        if out.var(id).kind != VarKind::Binary {
            return Err(ModelError::NotBinary(name.clone()));
        }
        let cand = *candidate.get(name).ok_or_else(|| ModelError::MissingBinary(name.clone()))?;
        if cand {
            // contributes (1 - x)
            terms.push((id, -1.0));
            rhs -= 1.0;
        } else {
            terms.push((id, 1.0));
        }
    }
    for (name, &value) in candidate {
        if subset.contains(name) {
            continue;
        }
        let id = out.var_id(name).ok_or_else(|| ModelError::UnknownVar(name.clone()))?;
        out.fix_var(id, if value { 1.0 } else { 0.0 });
    }
    out.add_constraint(format!("hamming:{h}"), terms, Cmp::Eq, rhs);
    out.provenance = Provenance::N2Relax;
    Ok(out)
}

/// Add a no-good cut excluding exactly the given assignment on its subset.
pub fn add_nogood_cut(m: &ModelIR, assignment: &Assignment) -> Result<ModelIR, ModelError> {
    if assignment.is_empty() {
        return Err(ModelError::EmptyNoGood);
    }
    let mut out = m.clone();
    let mut terms = Vec::new();
    let mut rhs = 1.0;
    for (name, &value) in assignment {
        let id = out.var_id(name).ok_or_else(|| ModelError::UnknownVar(name.clone()))?;
        if out.var(id).kind != VarKind::Binary {
            return Err(ModelError::NotBinary(name.clone()));
        }
        if value {
            terms.push((id, -1.0));
            rhs -= 1.0;
        } else {
            terms.push((id, 1.0));
        }
    }
    let n = out.constraints.iter().filter(|c| c.name.starts_with("nogood:")).count();
    out.add_constraint(format!("nogood:{n}"), terms, Cmp::Ge, rhs);
    Ok(out)
}
