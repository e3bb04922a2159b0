//! Network data model for water distribution systems.
//!
//! A [`Network`] is an immutable collection of junctions, pipes, pumps,
//! tanks, reservoirs and demand points on a uniform time grid, together
//! with the physical parameters that drive the hydraulics: Hazen-Williams
//! head loss along pipes, concave quadratic head gain across pumps, and
//! linear tank volume dynamics.
//!
//! Everything here is plain data plus pure functions; construction checks
//! referential integrity and [`validate_network`] reports value-level
//! invariant violations without failing.
//!
//! ```
//! use wdn_core::*;
//!
//! let net = Network::new(
//!     TimeGrid::new(1, 1.0),
//!     vec![
//!         Junction { id: "A".into(), head_min: 10.0, head_max: 10.0 },
//!         Junction { id: "B".into(), head_min: 0.0, head_max: 10.0 },
//!     ],
//!     vec![Pipe {
//!         id: "P".into(), from: "A".into(), to: "B".into(),
//!         length: 10.0, resistance_per_length: 0.1,
//!         flow_max_pos: 3.0, flow_min_pos: 0.0,
//!         flow_max_neg: 3.0, flow_min_neg: 0.0,
//!         headdiff_cap_pos: None, headdiff_cap_neg: None,
//!     }],
//!     vec![],
//!     vec![],
//!     vec![Reservoir { id: "R".into(), junction: "A".into(), head: 10.0 }],
//!     vec![DemandPoint { id: "D".into(), junction: "B".into(), max_demand: vec![0.5] }],
//! )?;
//! assert!(validate_network(&net).is_valid());
//!
//! // a 2 m³/s flow loses r·L·q^1.852 = 1·2^1.852 ≈ 3.61 m of head
//! let dh = hazen_williams_headloss(0.1, 10.0, 2.0, net.hw_exponent)?;
//! assert!((dh - 3.61).abs() < 0.01);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

mod hydraulics;
mod network;
mod validate;

pub use hydraulics::{
    derive_head_difference_bounds, hazen_williams_headloss, pump_head_gain, HeadDiffBounds,
    HydraulicsError, HW_EXPONENT,
};
pub use network::{
    ArcRef, DemandPoint, Junction, JunctionIncidence, Network, NetworkError, Pipe, Pump,
    Reservoir, Tank, TimeGrid,
};
pub use validate::{validate_network, ValidationReport, Violation};
