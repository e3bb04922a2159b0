use thiserror::Error;

use crate::network::{ArcRef, Network, NetworkError, Pump};

/// Default Hazen-Williams exponent.
pub const HW_EXPONENT: f64 = 1.852;

#[derive(Debug, Error)]
pub enum HydraulicsError {
    #[error("flow must be nonnegative, got {0}")]
    NegativeFlow(f64),
    #[error("pump `{id}`: flow {q} outside active bounds [{lo}, {hi}]")]
    FlowOutsideActiveBounds { id: String, q: f64, lo: f64, hi: f64 },
    #[error("pump `{id}`: inactive pump requires zero flow, got {q}")]
    InactiveNonzeroFlow { id: String, q: f64 },
}

/// Hazen-Williams head loss `r·L·q^exponent` for nonnegative directional flow.
pub fn hazen_williams_headloss(
    resistance_per_length: f64,
    length: f64,
    q: f64,
    exponent: f64,
) -> Result<f64, HydraulicsError> {
    if q < 0.0 {
        return Err(HydraulicsError::NegativeFlow(q));
    }
    Ok(resistance_per_length * length * q.powf(exponent))
}

/// Head gain `alpha·q² + beta·q + gamma·z` of a pump, `z = active as 0/1`.
///
/// Active pumps must run within their flow bounds; inactive pumps carry no
/// flow and provide no gain.
pub fn pump_head_gain(pump: &Pump, q: f64, active: bool) -> Result<f64, HydraulicsError> {
    if active {
        if q < pump.flow_min_on || q > pump.flow_max_on {
            return Err(HydraulicsError::FlowOutsideActiveBounds {
                id: pump.id.clone(),
                q,
                lo: pump.flow_min_on,
                hi: pump.flow_max_on,
            });
        }
        Ok(pump.alpha * q * q + pump.beta * q + pump.gamma)
    } else {
        if q != 0.0 {
            return Err(HydraulicsError::InactiveNonzeroFlow { id: pump.id.clone(), q });
        }
        Ok(0.0)
    }
}

/// Head-difference bounds of an arc, derived from the endpoint junctions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadDiffBounds {
    /// Upper bound on `h_from − h_to`, clamped at zero.
    pub dh_plus_max: f64,
    /// Upper bound on `h_to − h_from`, clamped at zero.
    pub dh_minus_max: f64,
    /// Lower bound on `h_to − h_from` (may be negative).
    pub dh_minus_min: f64,
}

/// Head-difference bounds from the maximum and minimum heads achievable at
/// the arc endpoints. Explicit pipe caps, when present, override the derived
/// maxima.
pub fn derive_head_difference_bounds(
    net: &Network,
    arc_id: &str,
) -> Result<HeadDiffBounds, NetworkError> {
    let arc = net.arc(arc_id).ok_or_else(|| NetworkError::UnknownArc(arc_id.to_string()))?;
    let (fr, to) = net.arc_endpoints(arc);
    let fr = &net.junctions[fr];
    let to = &net.junctions[to];
    let mut bounds = HeadDiffBounds {
        dh_plus_max: (fr.head_max - to.head_min).max(0.0),
        dh_minus_max: (to.head_max - fr.head_min).max(0.0),
        dh_minus_min: to.head_min - fr.head_max,
    };
    if let ArcRef::Pipe(i) = arc {
        let pipe = &net.pipes[i];
        if let Some(cap) = pipe.headdiff_cap_pos {
            bounds.dh_plus_max = cap;
        }
        if let Some(cap) = pipe.headdiff_cap_neg {
            bounds.dh_minus_max = cap;
        }
    }
    Ok(bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Junction, Pipe, TimeGrid};

    #[test]
    fn headloss_zero_flow() {
        assert_eq!(hazen_williams_headloss(2.0, 1.0, 0.0, HW_EXPONENT).unwrap(), 0.0);
    }

    #[test]
    fn headloss_unit_flow() {
        assert_eq!(hazen_williams_headloss(1.0, 2.0, 1.0, HW_EXPONENT).unwrap(), 2.0);
    }

    #[test]
    fn headloss_matches_scalar_evaluation() {
        // 2 · 2^1.852
        let dh = hazen_williams_headloss(2.0, 1.0, 2.0, HW_EXPONENT).unwrap();
        assert!((dh - 7.2200).abs() < 1e-4, "dh = {dh}");
    }

    #[test]
    fn headloss_rejects_negative_flow() {
        assert!(hazen_williams_headloss(1.0, 1.0, -0.1, HW_EXPONENT).is_err());
    }

    fn pump(alpha: f64, beta: f64, gamma: f64, lo: f64, hi: f64) -> Pump {
        Pump {
            id: "PU".into(),
            from: "A".into(),
            to: "B".into(),
            flow_min_on: lo,
            flow_max_on: hi,
            alpha,
            beta,
            gamma,
            omega: 1.0,
            mu: 0.0,
            energy_price: vec![1.0],
        }
    }

    #[test]
    fn head_gain_direct_substitution() {
        let p = pump(-1.0, 0.0, 4.0, 0.5, 2.0);
        assert_eq!(pump_head_gain(&p, 1.0, true).unwrap(), 3.0);
        let p = pump(-0.5, 1.0, 2.0, 0.5, 2.0);
        assert_eq!(pump_head_gain(&p, 2.0, true).unwrap(), 2.0);
    }

    #[test]
    fn head_gain_inactive_pump() {
        let p = pump(-1.0, 0.0, 4.0, 0.5, 2.0);
        assert_eq!(pump_head_gain(&p, 0.0, false).unwrap(), 0.0);
        assert!(pump_head_gain(&p, 0.1, false).is_err());
    }

    #[test]
    fn head_gain_rejects_out_of_range_flow() {
        let p = pump(-1.0, 0.0, 4.0, 0.5, 2.0);
        assert!(pump_head_gain(&p, 0.1, true).is_err());
        assert!(pump_head_gain(&p, 2.5, true).is_err());
    }

    fn two_junction_net(fr: (f64, f64), to: (f64, f64), caps: (Option<f64>, Option<f64>)) -> Network {
        Network::new(
            TimeGrid::new(1, 1.0),
            vec![
                Junction { id: "A".into(), head_min: fr.0, head_max: fr.1 },
                Junction { id: "B".into(), head_min: to.0, head_max: to.1 },
            ],
            vec![Pipe {
                id: "P".into(),
                from: "A".into(),
                to: "B".into(),
                length: 1.0,
                resistance_per_length: 1.0,
                flow_max_pos: 1.0,
                flow_min_pos: 0.0,
                flow_max_neg: 1.0,
                flow_min_neg: 0.0,
                headdiff_cap_pos: caps.0,
                headdiff_cap_neg: caps.1,
            }],
            vec![],
            vec![],
            vec![],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn head_difference_bounds_arithmetic() {
        let net = two_junction_net((10.0, 20.0), (5.0, 15.0), (None, None));
        let b = derive_head_difference_bounds(&net, "P").unwrap();
        assert_eq!(b.dh_plus_max, 15.0);
        assert_eq!(b.dh_minus_max, 5.0);
        assert_eq!(b.dh_minus_min, -15.0);
    }

    #[test]
    fn head_difference_bounds_degenerate() {
        let net = two_junction_net((10.0, 10.0), (10.0, 10.0), (None, None));
        let b = derive_head_difference_bounds(&net, "P").unwrap();
        assert_eq!((b.dh_plus_max, b.dh_minus_max, b.dh_minus_min), (0.0, 0.0, 0.0));
    }

    #[test]
    fn head_difference_bounds_clamped() {
        let net = two_junction_net((0.0, 5.0), (10.0, 20.0), (None, None));
        let b = derive_head_difference_bounds(&net, "P").unwrap();
        assert_eq!(b.dh_plus_max, 0.0);
        assert_eq!(b.dh_minus_max, 20.0);
        assert_eq!(b.dh_minus_min, 5.0);
    }

    #[test]
    fn explicit_caps_override() {
        let net = two_junction_net((10.0, 20.0), (5.0, 15.0), (Some(7.0), Some(2.0)));
        let b = derive_head_difference_bounds(&net, "P").unwrap();
        assert_eq!(b.dh_plus_max, 7.0);
        assert_eq!(b.dh_minus_max, 2.0);
    }

    #[test]
    fn unknown_arc_errors() {
        let net = two_junction_net((0.0, 1.0), (0.0, 1.0), (None, None));
        assert!(derive_head_difference_bounds(&net, "nope").is_err());
    }
}
