//! Deterministic discrete-event simulator of UAV-assisted data delivery
//! in a single 5G cell, with an optional permissioned ledger that
//! authenticates relay UAVs and records delivery receipts.
//!
//! Three delivery schemes are compared under identical scenarios:
//!
//! * `n2n-bs` — classic two-hop delivery through the base station,
//! * `n2n-uav-no-bc` — greedy geographic relaying over the UAV fleet,
//! * `n2n-uav-bc` — the same relaying with ledger-backed authentication
//!   that screens rogue UAVs out of the forwarding set.
//!
//! Runs are reproducible bit-for-bit from `(config, seed)`; see
//! [`rng`] for the stream discipline and [`engine::run`] for the
//! orchestration.

pub mod channel;
pub mod config;
pub mod engine;
pub mod entity;
pub mod event;
pub mod ledger;
pub mod metrics;
pub mod mobility;
pub mod rng;
pub mod routing;
pub mod sweep;

pub use config::{load_config, ConfigError, SampleFlows, Scheme, SimConfig};
pub use engine::{run, SimError, SimOutput};
pub use metrics::MetricsReport;
pub use sweep::{run_sweep, SweepResult, SweepSpec};
