//! Exhaustive micro-instance oracle.
//!
//! Enumerates every binary schedule of a chain-shaped network (reservoir,
//! a run of pipes, optionally one pump feeding the final junction, and an
//! optional tank plus demand point there); per schedule, demand withdrawals
//! are searched on a shrinking grid while the chain flow follows exactly
//! from the head physics by bisection. Shares no code with the model IR
//! or the SLP path — this is the acceptance yardstick.

use std::collections::BTreeMap;

use model_ir::Assignment;
use thiserror::Error;
use wdn_core::{ArcRef, Network};

#[derive(Debug, Error)]
pub enum BruteError {
    #[error("size guard exceeded: {binaries} binaries / {time_points} time points (max 8 / 4)")]
    SizeGuard { binaries: usize, time_points: usize },
    #[error("unsupported topology for the brute-force oracle: {0}")]
    UnsupportedTopology(String),
}

struct Chain<'a> {
    net: &'a Network,
    /// Junction indices along the chain; the reservoir sits at the head.
    junctions: Vec<usize>,
    arcs: Vec<ArcRef>,
    reservoir: usize,
    tank: Option<usize>,
    demand: Option<usize>,
}

fn extract_chain(net: &Network) -> Result<Chain<'_>, BruteError> {
    let unsupported = |msg: &str| BruteError::UnsupportedTopology(msg.to_string());
    if net.reservoirs.len() != 1 {
        return Err(unsupported("exactly one reservoir required"));
    }
    let reservoir = 0usize;
    let start = net.junction_idx(&net.reservoirs[0].junction).expect("reservoir junction");
    let inc0 = net.incidence(start);
    if !inc0.tanks.is_empty() || !inc0.demands.is_empty() {
        return Err(unsupported("reservoir junction must carry no tank or demand"));
    }

    let mut junctions = vec![start];
    let mut arcs = Vec::new();
    let mut cur = start;
    loop {
        let inc = net.incidence(cur);
        let mut out: Vec<ArcRef> = inc.pipes_out.iter().map(|&i| ArcRef::Pipe(i)).collect();
        out.extend(inc.pumps_out.iter().map(|&i| ArcRef::Pump(i)));
        let inbound = inc.pipes_in.len() + inc.pumps_in.len();
        if junctions.len() == 1 && inbound > 0 {
            return Err(unsupported("arcs must be oriented away from the reservoir"));
        }
        match out.len() {
            0 => break,
            1 => {
                let arc = out[0];
                let (_, to) = net.arc_endpoints(arc);
                arcs.push(arc);
                junctions.push(to);
                cur = to;
            }
            _ => return Err(unsupported("junction with more than one outgoing arc")),
        }
        if junctions.len() > net.junctions.len() {
            return Err(unsupported("cycle detected"));
        }
    }
    if arcs.is_empty() {
        return Err(unsupported("no arcs"));
    }
    // pumps only as the final arc
    for (i, arc) in arcs.iter().enumerate() {
        if matches!(arc, ArcRef::Pump(_)) && i + 1 != arcs.len() {
            return Err(unsupported("a pump is only supported as the last arc"));
        }
    }
    if net.pumps.len() > 1 {
        return Err(unsupported("at most one pump"));
    }
    if net.tanks.len() > 1 || net.demands.len() > 1 {
        return Err(unsupported("at most one tank and one demand point"));
    }
    let last = *junctions.last().unwrap();
    let tank = match net.tanks.first() {
        None => None,
        Some(t) => {
            if net.junction_idx(&t.junction) != Some(last) {
                return Err(unsupported("the tank must sit at the final junction"));
            }
            Some(0)
        }
    };
    let demand = match net.demands.first() {
        None => None,
        Some(d) => {
            if net.junction_idx(&d.junction) != Some(last) {
                return Err(unsupported("the demand point must sit at the final junction"));
            }
            Some(0)
        }
    };
    // intermediate junctions must be pure pass-throughs
    for &j in &junctions[1..junctions.len() - 1] {
        let inc = net.incidence(j);
        if !inc.tanks.is_empty() || !inc.demands.is_empty() || !inc.reservoirs.is_empty() {
            return Err(unsupported("intermediate junctions must be pass-throughs"));
        }
    }
    Ok(Chain { net, junctions, arcs, reservoir, tank, demand })
}

/// Values of one simulated feasible point.
type ValueMap = BTreeMap<String, f64>;

struct Simulator<'a> {
    chain: &'a Chain<'a>,
    /// y per pipe arc and time, z per pump arc and time, chain order.
    schedule: &'a Assignment,
}

const EPS: f64 = 1e-9;

impl Simulator<'_> {
    fn bit(&self, arc: ArcRef, t: usize) -> bool {
        let net = self.chain.net;
        let tag = match arc {
            ArcRef::Pipe(i) => format!("y:{}:{t}", net.pipes[i].id),
            ArcRef::Pump(i) => format!("z:{}:{t}", net.pumps[i].id),
        };
        *self.schedule.get(&tag).expect("schedule covers all binaries")
    }

    /// Head profile along a conducting chain at flow `q ≥ 0`. Checks only
    /// the arc flow bounds; junction bounds are the caller's concern, so the
    /// root-find can probe bracket endpoints freely.
    fn profile(&self, q: f64, t: usize) -> Option<Vec<f64>> {
        let net = self.chain.net;
        let mut heads = Vec::with_capacity(self.chain.junctions.len());
        let mut h = net.reservoirs[self.chain.reservoir].head;
        heads.push(h);
        for arc in &self.chain.arcs {
            match *arc {
                ArcRef::Pipe(i) => {
                    let p = &net.pipes[i];
                    if q > p.flow_max_pos + EPS || q < p.flow_min_pos - EPS {
                        return None;
                    }
                    h -= p.resistance_per_length * p.length * q.powf(net.hw_exponent);
                }
                ArcRef::Pump(i) => {
                    let p = &net.pumps[i];
                    if !self.bit(*arc, t) {
                        return None;
                    }
                    if q > p.flow_max_on + EPS || q < p.flow_min_on - EPS {
                        return None;
                    }
                    h += p.alpha * q * q + p.beta * q + p.gamma;
                }
            }
            heads.push(h);
        }
        Some(heads)
    }

    fn heads_within_bounds(&self, heads: &[f64]) -> bool {
        self.chain.junctions.iter().zip(heads).all(|(&j, &hj)| {
            let junction = &self.chain.net.junctions[j];
            hj >= junction.head_min - EPS && hj <= junction.head_max + EPS
        })
    }

    /// Conducting profile with junction bounds enforced.
    fn head_profile(&self, q: f64, t: usize) -> Option<Vec<f64>> {
        let heads = self.profile(q, t)?;
        self.heads_within_bounds(&heads).then_some(heads)
    }

    /// Conducting-chain flow range respecting every arc bound at time `t`.
    fn flow_range(&self, t: usize) -> Option<(f64, f64)> {
        let net = self.chain.net;
        let mut lo = 0.0f64;
        let mut hi = f64::INFINITY;
        for arc in &self.chain.arcs {
            match *arc {
                ArcRef::Pipe(i) => {
                    if !self.bit(*arc, t) {
                        return None; // reverse direction unsupported on the chain
                    }
                    lo = lo.max(net.pipes[i].flow_min_pos);
                    hi = hi.min(net.pipes[i].flow_max_pos);
                }
                ArcRef::Pump(i) => {
                    lo = lo.max(net.pumps[i].flow_min_on);
                    hi = hi.min(net.pumps[i].flow_max_on);
                }
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Zero-flow state: every pipe idle (its direction bit must allow zero
    /// flow), pump off if present. Heads equalize along pipes and decouple
    /// across the pump.
    fn zero_flow_heads(&self, t: usize) -> Option<Vec<f64>> {
        let net = self.chain.net;
        let mut heads = Vec::with_capacity(self.chain.junctions.len());
        let mut h = net.reservoirs[self.chain.reservoir].head;
        heads.push(h);
        for arc in &self.chain.arcs {
            match *arc {
                ArcRef::Pipe(i) => {
                    let p = &net.pipes[i];
                    let min_active = if self.bit(*arc, t) { p.flow_min_pos } else { p.flow_min_neg };
                    if min_active > EPS {
                        return None; // the direction gate forces positive flow
                    }
                    heads.push(h);
                }
                ArcRef::Pump(_) => {
                    if self.bit(*arc, t) {
                        return None; // an active pump cannot sit at zero flow
                    }
                    // decoupled: the downstream head is pinned by the tank or free
                    h = f64::NAN;
                    heads.push(h);
                }
            }
        }
        Some(heads)
    }
}

/// Simulate one schedule with fixed per-time demand withdrawals. Feasible
/// runs return the objective and the full value map.
fn simulate(chain: &Chain<'_>, schedule: &Assignment, demands: &[f64]) -> Option<(f64, ValueMap)> {
    let net = chain.net;
    let nt = net.time.num_points;
    let dt_s = net.time.dt_seconds();
    let sim = Simulator { chain, schedule };
    let last = *chain.junctions.last().unwrap();
    let tank = chain.tank.map(|i| &net.tanks[i]);

    let mut values = ValueMap::new();
    let mut volume = tank.map(|t| t.volume_initial);
    let mut objective = 0.0;

    for t in 0..nt {
        let pump_on = chain
            .arcs
            .iter()
            .any(|a| matches!(a, ArcRef::Pump(_)) && sim.bit(*a, t));
        let has_pump = chain.arcs.iter().any(|a| matches!(a, ArcRef::Pump(_)));
        let q_d = demands.get(t).copied().unwrap_or(0.0);
        if let Some(d) = chain.demand {
            let cap = net.demands[d].max_demand[t];
            if q_d < -EPS || q_d > cap + EPS {
                return None;
            }
        } else if q_d.abs() > EPS {
            return None;
        }

        // pick the chain flow
        let (flow, heads): (f64, Vec<f64>) = if has_pump && !pump_on {
            // severed chain: zero flow upstream, the final junction stands alone
            let mut heads = sim.zero_flow_heads(t)?;
            let h_last = match (tank, volume) {
                (Some(tk), Some(v)) => tk.bottom + v / tk.area,
                _ => {
                    // free head: anything within bounds works
                    let j = &net.junctions[last];
                    0.5 * (j.head_min + j.head_max)
                }
            };
            *heads.last_mut().unwrap() = h_last;
            for (&j, &hj) in chain.junctions.iter().zip(&heads) {
                let junction = &net.junctions[j];
                if hj < junction.head_min - EPS || hj > junction.head_max + EPS {
                    return None;
                }
            }
            (0.0, heads)
        } else {
            match (tank, volume) {
                (Some(tk), Some(v)) => {
                    // the tank pins the final head: solve for the chain flow
                    let target = tk.bottom + v / tk.area;
                    let (lo, hi) = sim.flow_range(t)?;
                    let f = |q: f64| sim.profile(q, t).map(|hs| *hs.last().unwrap() - target);
                    // profile is strictly decreasing in q
                    let f_lo = f(lo)?;
                    let f_hi = f(hi)?;
                    let q = if f_lo.abs() <= 1e-11 {
                        lo
                    } else if f_hi.abs() <= 1e-11 {
                        hi
                    } else if f_lo > 0.0 && f_hi < 0.0 {
                        let (mut qa, mut qb) = (lo, hi);
                        for _ in 0..200 {
                            let mid = 0.5 * (qa + qb);
                            match f(mid) {
                                Some(v) if v > 0.0 => qa = mid,
                                Some(_) => qb = mid,
                                None => return None,
                            }
                        }
                        0.5 * (qa + qb)
                    } else {
                        return None;
                    };
                    let heads = sim.head_profile(q, t)?;
                    (q, heads)
                }
                _ => {
                    // no storage: the chain carries exactly the withdrawal
                    let q = q_d;
                    if has_pump || q > EPS {
                        let (lo, hi) = sim.flow_range(t)?;
                        if q < lo - EPS || q > hi + EPS {
                            return None;
                        }
                        (q, sim.head_profile(q, t)?)
                    } else {
                        let mut heads = sim.zero_flow_heads(t)?;
                        for h in heads.iter_mut() {
                            if h.is_nan() {
                                return None;
                            }
                        }
                        for (&j, &hj) in chain.junctions.iter().zip(&heads) {
                            let junction = &net.junctions[j];
                            if hj < junction.head_min - EPS || hj > junction.head_max + EPS {
                                return None;
                            }
                        }
                        let last_head = *heads.last().unwrap();
                        let _ = last_head;
                        (0.0, heads)
                    }
                }
            }
        };

        // tank balance
        if let (Some(tk), Some(v)) = (tank, volume) {
            let q_tk = q_d - flow;
            let v_next = v - q_tk * dt_s;
            if t + 1 < nt && (v_next < tk.volume_min - 1e-9 || v_next > tk.volume_max + 1e-9) {
                return None;
            }
            values.insert(format!("vol:{}:{t}", tk.id), v);
            values.insert(format!("qtk:{}:{t}", tk.id), q_tk);
            if t + 1 < nt {
                volume = Some(v_next);
            }
        } else if flow + EPS < q_d {
            return None; // withdrawal exceeds what the chain can carry
        }

        // record the trace
        values.insert(format!("qres:{}:{t}", net.reservoirs[chain.reservoir].id), flow);
        if let Some(d) = chain.demand {
            values.insert(format!("qdem:{}:{t}", net.demands[d].id), q_d);
        }
        for (&j, &h) in chain.junctions.iter().zip(&heads) {
            values.insert(format!("head:{}:{t}", net.junctions[j].id), h);
        }
        for (idx, arc) in chain.arcs.iter().enumerate() {
            match *arc {
                ArcRef::Pipe(i) => {
                    let p = &net.pipes[i];
                    let y = sim.bit(*arc, t);
                    let loss = (heads[idx] - heads[idx + 1]).max(0.0);
                    values.insert(format!("y:{}:{t}", p.id), if y { 1.0 } else { 0.0 });
                    values.insert(format!("q:{}:{t}", p.id), flow);
                    values.insert(format!("q+:{}:{t}", p.id), flow.max(0.0));
                    values.insert(format!("q-:{}:{t}", p.id), (-flow).max(0.0));
                    values.insert(format!("dh+:{}:{t}", p.id), if flow > 0.0 { loss } else { 0.0 });
                    values.insert(format!("dh-:{}:{t}", p.id), 0.0);
                }
                ArcRef::Pump(i) => {
                    let p = &net.pumps[i];
                    let z = sim.bit(*arc, t);
                    let q = if z { flow } else { 0.0 };
                    let g = if z { p.alpha * q * q + p.beta * q + p.gamma } else { 0.0 };
                    values.insert(format!("z:{}:{t}", p.id), if z { 1.0 } else { 0.0 });
                    values.insert(format!("qpu:{}:{t}", p.id), q);
                    values.insert(format!("g:{}:{t}", p.id), g);
                    values.insert(format!("pw:{}:{t}", p.id), p.omega * q + p.mu * if z { 1.0 } else { 0.0 });
                }
            }
        }

        objective += q_d;
    }
    Some((objective, values))
}

fn binary_tags(chain: &Chain<'_>) -> Vec<String> {
    let net = chain.net;
    let mut tags = Vec::new();
    for arc in &chain.arcs {
        for t in 0..net.time.num_points {
            match *arc {
                ArcRef::Pipe(i) => tags.push(format!("y:{}:{t}", net.pipes[i].id)),
                ArcRef::Pump(i) => tags.push(format!("z:{}:{t}", net.pumps[i].id)),
            }
        }
    }
    tags
}

fn guard(net: &Network) -> Result<(), BruteError> {
    let binaries = (net.pipes.len() + net.pumps.len()) * net.time.num_points;
    if binaries > 8 || net.time.num_points > 4 {
        return Err(BruteError::SizeGuard { binaries, time_points: net.time.num_points });
    }
    Ok(())
}

/// Search one schedule over demand grids with shrinking windows down to
/// `grid_step` resolution.
fn optimize_schedule(
    chain: &Chain<'_>,
    schedule: &Assignment,
    grid_step: f64,
) -> Option<(f64, ValueMap)> {
    let net = chain.net;
    let nt = net.time.num_points;
    let caps: Vec<f64> = match chain.demand {
        Some(d) => (0..nt).map(|t| net.demands[d].max_demand[t]).collect(),
        None => vec![0.0; nt],
    };
    let mut centers: Vec<f64> = caps.iter().map(|&c| 0.5 * c).collect();
    let mut widths: Vec<f64> = caps.clone();
    let points = 21usize;
    let mut best: Option<(f64, Vec<f64>, ValueMap)> = None;

    loop {
        let grids: Vec<Vec<f64>> = (0..nt)
            .map(|t| {
                let lo = (centers[t] - 0.5 * widths[t]).max(0.0);
                let hi = (centers[t] + 0.5 * widths[t]).min(caps[t]);
                if hi - lo < 1e-15 {
                    return vec![lo];
                }
                (0..points)
                    .map(|i| lo + (hi - lo) * (i as f64) / ((points - 1) as f64))
                    .collect()
            })
            .collect();
        let mut odometer = vec![0usize; nt];
        loop {
            let demands: Vec<f64> = (0..nt).map(|t| grids[t][odometer[t]]).collect();
            if let Some((obj, values)) = simulate(chain, schedule, &demands) {
                if best.as_ref().map_or(true, |(b, _, _)| obj > *b + 1e-15) {
                    best = Some((obj, demands.clone(), values));
                }
            }
            // advance
            let mut t = 0;
            loop {
                if t == nt {
                    break;
                }
                odometer[t] += 1;
                if odometer[t] < grids[t].len() {
                    break;
                }
                odometer[t] = 0;
                t += 1;
            }
            if t == nt {
                break;
            }
        }
        let max_width = widths.iter().cloned().fold(0.0f64, f64::max);
        if max_width <= grid_step * ((points - 1) as f64) || max_width < 1e-12 {
            break;
        }
        let Some((_, ref center, _)) = best else { break };
        centers = center.clone();
        for w in widths.iter_mut() {
            *w /= (points - 1) as f64 / 2.0;
        }
    }
    best.map(|(obj, _, values)| (obj, values))
}

/// Enumerate every binary schedule; per schedule the best feasible objective
/// or `None`.
pub fn enumerate_schedules(
    net: &Network,
    grid_step: f64,
) -> Result<Vec<(Assignment, Option<f64>)>, BruteError> {
    guard(net)?;
    let chain = extract_chain(net)?;
    let tags = binary_tags(&chain);
    let mut out = Vec::with_capacity(1 << tags.len());
    for mask in 0..(1u32 << tags.len()) {
        let schedule: Assignment = tags
            .iter()
            .enumerate()
            .map(|(i, tag)| (tag.clone(), (mask >> i) & 1 == 1))
            .collect();
        let best = optimize_schedule(&chain, &schedule, grid_step);
        out.push((schedule, best.map(|(obj, _)| obj)));
    }
    Ok(out)
}

/// Global optimum over all schedules. `None` when no feasible point exists.
pub fn brute_force_optimum(
    net: &Network,
    grid_step: f64,
) -> Result<Option<(f64, ValueMap)>, BruteError> {
    guard(net)?;
    let chain = extract_chain(net)?;
    let tags = binary_tags(&chain);
    let mut best: Option<(f64, ValueMap)> = None;
    for mask in 0..(1u32 << tags.len()) {
        let schedule: Assignment = tags
            .iter()
            .enumerate()
            .map(|(i, tag)| (tag.clone(), (mask >> i) & 1 == 1))
            .collect();
        if let Some((obj, values)) = optimize_schedule(&chain, &schedule, grid_step) {
            if best.as_ref().map_or(true, |(b, _)| obj > *b + 1e-15) {
                best = Some((obj, values));
            }
        }
    }
    Ok(best)
}
