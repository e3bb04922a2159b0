use std::collections::BTreeMap;

use model_ir::{build_n1, Cmp, ModelIR, Provenance, Sense, TermKind, VarKind};
use wdn_core::Network;

use crate::envelope::{envelope_power, envelope_quadratic, EnvelopeBlock, EnvelopeKind, RelaxConfig};
use crate::partition::{PartitionSet, RelaxError};

/// Replace the nonlinear terms of the demand-maximization model with
/// convex-combination envelope blocks over the given partitions. Every
/// linear family and the objective carry over unchanged.
pub fn build_l1(net: &Network, ps: &PartitionSet) -> Result<ModelIR, RelaxError> {
    build_l1_with(net, ps, &RelaxConfig::default())
}

pub fn build_l1_with(net: &Network, ps: &PartitionSet, cfg: &RelaxConfig) -> Result<ModelIR, RelaxError> {
    let mut m = build_n1(net)?;
    let terms = std::mem::take(&mut m.nonlinear);
    for term in &terms {
        let partition = ps
            .get(&term.group)
            .ok_or_else(|| RelaxError::MissingPartition(term.group.clone()))?;
        let block = match term.kind {
            TermKind::SignedPower { .. } => envelope_power(term, partition, cfg)?,
            TermKind::Quadratic { .. } => envelope_quadratic(term, partition, cfg)?,
        };
        emit_block(&mut m, term, &block);
    }
    m.provenance = Provenance::L1;
    m.name = format!("l1-k{}", ps.level);
    Ok(m)
}

/// Emit the convex-combination rows of one envelope block: an interval
/// selector binary per interval, nonnegative weights over the interval's
/// polygon vertices summing to the active selector, and the linear rows
/// tying the base and output variables to the weighted vertices.
fn emit_block(m: &mut ModelIR, term: &model_ir::NonlinearTerm, block: &EnvelopeBlock) {
    let base = term.base_var();
    let out = term.out_var();
    let mut sum_row: Vec<(model_ir::VarId, f64)> = Vec::new();
    let mut x_row: Vec<(model_ir::VarId, f64)> = vec![(base, 1.0)];
    let mut y_row: Vec<(model_ir::VarId, f64)> = vec![(out, 1.0)];
    for (i, iv) in block.intervals.iter().enumerate() {
        let sel = m.add_var(format!("sel:{}:{i}", term.id), VarKind::Binary, 0.0, 1.0);
        sum_row.push((sel, 1.0));
        let mut w_row: Vec<(model_ir::VarId, f64)> = vec![(sel, -1.0)];
        for (v, &(x, y)) in iv.vertices.iter().enumerate() {
            let w = m.add_var(format!("w:{}:{i}:{v}", term.id), VarKind::Continuous, 0.0, 1.0);
            w_row.push((w, 1.0));
            x_row.push((w, -x));
            y_row.push((w, -y));
        }
        m.add_constraint(format!("envw:{}:{i}", term.id), w_row, Cmp::Eq, 0.0);
    }
    match block.kind {
        EnvelopeKind::Power => {
            m.add_constraint(format!("envsum:{}", term.id), sum_row, Cmp::Eq, 1.0);
        }
        EnvelopeKind::QuadraticGated => {
            let TermKind::Quadratic { z, .. } = term.kind else { unreachable!() };
            sum_row.push((z, -1.0));
            m.add_constraint(format!("envsum:{}", term.id), sum_row, Cmp::Eq, 0.0);
        }
    }
    m.add_constraint(format!("envx:{}", term.id), x_row, Cmp::Eq, 0.0);
    m.add_constraint(format!("envy:{}", term.id), y_row, Cmp::Eq, 0.0);
}

/// Tie-breaking relaxation: demands pinned to the values of an L1 optimum,
/// objective flipped to minimizing pump operating cost plus total reservoir
/// supply.
pub fn build_l2(
    net: &Network,
    ps: &PartitionSet,
    fixed_demands: &BTreeMap<String, f64>,
) -> Result<ModelIR, RelaxError> {
    build_l2_with(net, ps, fixed_demands, &RelaxConfig::default())
}

pub fn build_l2_with(
    net: &Network,
    ps: &PartitionSet,
    fixed_demands: &BTreeMap<String, f64>,
    cfg: &RelaxConfig,
) -> Result<ModelIR, RelaxError> {
    let mut m = build_l1_with(net, ps, cfg)?;
    for d in &net.demands {
        for t in net.time.steps() {
            let tag = format!("qdem:{}:{t}", d.id);
            let value = *fixed_demands
                .get(&tag)
                .ok_or_else(|| RelaxError::MissingDemandValue(tag.clone()))?;
            let id = m.var_id(&tag).expect("demand var exists");
            m.fix_var(id, value);
        }
    }
    m.objective.sense = Sense::Minimize;
    m.objective.terms.clear();
    let dt_h = net.time.dt_hours;
    for r in &net.reservoirs {
        for t in net.time.steps() {
            let id = m.var_id(&format!("qres:{}:{t}", r.id)).expect("reservoir var exists");
            m.objective.terms.push((id, 1.0));
        }
    }
    for p in &net.pumps {
        for t in net.time.steps() {
            let id = m.var_id(&format!("pw:{}:{t}", p.id)).expect("power var exists");
            let price = p.energy_price.get(t).copied().unwrap_or(1.0);
            m.objective.terms.push((id, price * dt_h));
        }
    }
    m.provenance = Provenance::L2;
    m.name = format!("l2-k{}", ps.level);
    Ok(m)
}
