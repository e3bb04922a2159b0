//! Piecewise-linear envelope geometry for the two nonlinear term kinds.
//!
//! Per partitioned interval the relaxed graph of `out = f(base)` is the
//! polygon between a secant and a small fan of tangents. For the convex
//! power curve the secant over-estimates and the tangents under-estimate;
//! the concave pump head-gain mirrors that. The polygon's vertices feed the
//! convex-combination rows emitted by the relaxation builders.

use model_ir::{NonlinearTerm, TermKind};

use crate::partition::{Partition, RelaxError};

/// Envelope construction knobs. `tangents_per_interval` counts the tangency
/// points per interval, endpoints included (minimum 2; the default adds the
/// midpoint).
#[derive(Debug, Clone, Copy)]
pub struct RelaxConfig {
    pub tangents_per_interval: usize,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        Self { tangents_per_interval: 3 }
    }
}

/// Polytope of one partitioned interval: the region between the two chains.
/// Both chains run from `(lo, f(lo))` to `(hi, f(hi))`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalGeometry {
    pub lo: f64,
    pub hi: f64,
    /// Vertices of the polygon, curve endpoints first.
    pub vertices: Vec<(f64, f64)>,
    pub lower_chain: Vec<(f64, f64)>,
    pub upper_chain: Vec<(f64, f64)>,
}

impl IntervalGeometry {
    fn eval_chain(chain: &[(f64, f64)], x: f64) -> f64 {
        for w in chain.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x >= x0 - 1e-12 && x <= x1 + 1e-12 {
                if (x1 - x0).abs() < 1e-15 {
                    return y0;
                }
                let t = (x - x0) / (x1 - x0);
                return y0 + t * (y1 - y0);
            }
        }
        chain.last().map(|&(_, y)| y).unwrap_or(0.0)
    }

    pub fn lower_at(&self, x: f64) -> f64 {
        Self::eval_chain(&self.lower_chain, x)
    }

    pub fn upper_at(&self, x: f64) -> f64 {
        Self::eval_chain(&self.upper_chain, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    /// Ungated: the interval selectors sum to one.
    Power,
    /// Gated by the pump activation binary: selectors sum to `z`, so the
    /// flow and head gain collapse to zero when the pump is off.
    QuadraticGated,
}

/// Envelope of one nonlinear term instance over a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeBlock {
    pub term_id: String,
    pub kind: EnvelopeKind,
    pub intervals: Vec<IntervalGeometry>,
}

impl EnvelopeBlock {
    /// Tightest relaxed bounds at `x` over the intervals containing it.
    pub fn bounds_at(&self, x: f64) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for iv in &self.intervals {
            if x >= iv.lo - 1e-12 && x <= iv.hi + 1e-12 {
                let lo = iv.lower_at(x);
                let hi = iv.upper_at(x);
                best = Some(match best {
                    None => (lo, hi),
                    Some((a, b)) => (a.min(lo), b.max(hi)),
                });
            }
        }
        best
    }
}

/// Tangent chain of a smooth curve between interval endpoints: the curve
/// endpoints joined through the pairwise intersections of consecutive
/// tangents. For convex `f` the chain runs below the curve, for concave
/// above it.
fn tangent_chain(
    f: &dyn Fn(f64) -> f64,
    fp: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tangents: usize,
) -> Vec<(f64, f64)> {
    let count = tangents.max(2);
    let points: Vec<f64> =
        (0..count).map(|i| lo + (hi - lo) * (i as f64) / ((count - 1) as f64)).collect();
    let mut chain = vec![(lo, f(lo))];
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (f(a), f(b));
        let (da, db) = (fp(a), fp(b));
        if (da - db).abs() < 1e-14 {
            continue; // locally affine, tangents coincide
        }
        let x = (fb - fa + a * da - b * db) / (da - db);
        let y = fa + da * (x - a);
        if x > lo + 1e-14 && x < hi - 1e-14 {
            chain.push((x, y));
        }
    }
    chain.push((hi, f(hi)));
    chain
}

fn build_block(
    term: &NonlinearTerm,
    partition: &Partition,
    cfg: &RelaxConfig,
    kind: EnvelopeKind,
    f: impl Fn(f64) -> f64,
    fp: impl Fn(f64) -> f64,
    convex: bool,
) -> EnvelopeBlock {
    let mut intervals = Vec::with_capacity(partition.num_intervals());
    for (lo, hi) in partition.intervals() {
        let secant = vec![(lo, f(lo)), (hi, f(hi))];
        let tangents = tangent_chain(&f, &fp, lo, hi, cfg.tangents_per_interval);
        let (lower_chain, upper_chain) =
            if convex { (tangents, secant) } else { (secant, tangents) };
        // the polygon's vertex set is the union of both chains; the chains
        // share their endpoints, so one copy of those suffices
        let mut vertices = lower_chain.clone();
        vertices.extend(upper_chain.iter().skip(1).take(upper_chain.len().saturating_sub(2)));
        intervals.push(IntervalGeometry { lo, hi, vertices, lower_chain, upper_chain });
    }
    EnvelopeBlock { term_id: term.id.clone(), kind, intervals }
}

/// Envelope of the convex power curve `out = scale·base^exponent` on a
/// nonnegative domain: secant over-estimator, tangent under-estimators.
pub fn envelope_power(
    term: &NonlinearTerm,
    partition: &Partition,
    cfg: &RelaxConfig,
) -> Result<EnvelopeBlock, RelaxError> {
    let TermKind::SignedPower { exponent, scale, .. } = term.kind else {
        return Err(RelaxError::BadExponent(term.id.clone()));
    };
    if term.dom_lo < 0.0 {
        return Err(RelaxError::NegativeDomain(term.id.clone()));
    }
    if exponent <= 1.0 {
        return Err(RelaxError::BadExponent(term.id.clone()));
    }
    let f = move |x: f64| scale * x.powf(exponent);
    let fp = move |x: f64| if x == 0.0 { 0.0 } else { scale * exponent * x.powf(exponent - 1.0) };
    Ok(build_block(term, partition, cfg, EnvelopeKind::Power, f, fp, true))
}

/// Envelope of the concave head-gain curve `out = alpha·q² + beta·q + gamma`
/// on the pump's active-flow domain: secant under-estimator, tangent
/// over-estimators, gated by the activation binary.
pub fn envelope_quadratic(
    term: &NonlinearTerm,
    partition: &Partition,
    cfg: &RelaxConfig,
) -> Result<EnvelopeBlock, RelaxError> {
    let TermKind::Quadratic { alpha, beta, gamma, .. } = term.kind else {
        return Err(RelaxError::BadAlpha(term.id.clone()));
    };
    if alpha >= 0.0 {
        return Err(RelaxError::BadAlpha(term.id.clone()));
    }
    let f = move |x: f64| alpha * x * x + beta * x + gamma;
    let fp = move |x: f64| 2.0 * alpha * x + beta;
    Ok(build_block(term, partition, cfg, EnvelopeKind::QuadraticGated, f, fp, false))
}
