//! Two-branch operator networks with per-subdomain nonlinear decoders.

mod config;
mod model;
mod triplet;

pub use config::{uniform_boundaries, NetArch, OperatorConfig, Partition, DEFAULT_BOUNDARIES};
pub use model::{branch_merge, DeepONetModel, OutputScaling};
pub use triplet::{Normalization, OperatorTriplet, TEMPERATURE_HEADROOM};
