//! Seeded, slot-level simulator of relevance-aware content selection for
//! V2X cooperative perception messages.
//!
//! A scenario of static objects and a handful of vehicles is generated from a
//! single seed. Vehicles take turns transmitting a message whose content is
//! picked by one of five selection schemes under a per-message budget, and the
//! resulting awareness and efficiency metrics are aggregated over Monte Carlo
//! replications.
//!
//! Module map:
//! - [`scenario`]: object placement, vehicle spawning, mobility, perception.
//! - [`relevance`]: per-vehicle relevance functions with distance correlation.
//! - [`schemes`]: the five content-selection schemes and the estimation model.
//! - [`engine`]: round-robin slot loop, knowledge bases and expiry.
//! - [`metrics`]: HRR, mean SV, LRR, usage, SE and estimation-error accumulators.
//! - [`harness`]: presets, config parsing, replicated sweeps and CSV output.

pub mod engine;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod object_set;
pub mod oracle;
pub mod relevance;
pub mod rng;
pub mod scenario;
pub mod schemes;

pub use engine::{EpisodeConfig, Mode};
pub use error::{Error, Result};
pub use harness::{ExperimentSpec, Preset};
pub use metrics::MetricsRecord;
pub use object_set::{ObjectId, ObjectSet};
pub use schemes::SchemeKind;
