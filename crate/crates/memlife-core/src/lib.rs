//! Memory-lifecycle control engine and diagnostic harness.
//!
//! The crate models post-admission memory maintenance: items are admitted into
//! a bounded store, later evidence adjusts a validity estimate (confidence) and
//! a retention-consequence estimate (strength), and settlement decides what is
//! promoted, compressed, or evicted under pressure. A zoo of baseline
//! controllers shares the same streams, budgets, and readout so that policies
//! differ only in how they use the carried state.

pub mod config;
pub mod dynamics;
pub mod flat;
pub mod harness;
pub mod metrics;
pub mod policy;
pub mod rng;
pub mod scenarios;
pub mod staged;
pub mod summary;
pub mod tiered;
pub mod trace;
pub mod types;

pub use dynamics::Dynamics;
pub use policy::{Policy, PolicyParams};
pub use types::{
    CapacityConfig, CueFeatures, Event, ItemId, ItemSpec, Labels, QuerySpec, ScenarioStream, Stage,
};
