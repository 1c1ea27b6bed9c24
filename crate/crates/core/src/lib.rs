//! Intermittent maps with a neutral fixed point and a cusp: exact evaluation,
//! Markov partitions and first-return maps, and the Monte Carlo estimators
//! used to check their statistical properties.

pub mod acceptance;
pub mod density;
pub mod error;
pub mod lab;
pub mod maps;
pub mod mc;
pub mod partition;
pub mod quad;
pub mod stats;
mod solve;

pub use error::{Error, Result};
pub use maps::{
    Branch, CircleParams, IntervalParams, Map, MapKind, MapParams, MapSpec, Orbit,
};
pub use mc::Estimate;
pub use partition::{build_partition, Cylinder, InducedMap, PartitionTable, Side};
