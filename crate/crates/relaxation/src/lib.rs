//! Piecewise-linear relaxation machinery: refinable partitions of the
//! nonlinear terms' base-variable domains, convex-combination envelopes,
//! and the builders for the demand-maximization MILP relaxation and its
//! tie-breaking companion.

mod build;
mod envelope;
mod partition;

pub use build::{build_l1, build_l1_with, build_l2, build_l2_with};
pub use envelope::{
    envelope_power, envelope_quadratic, EnvelopeBlock, EnvelopeKind, IntervalGeometry, RelaxConfig,
};
pub use partition::{initial_partition, partition_at_level, refine, Partition, PartitionSet, RelaxError};
