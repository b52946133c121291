//! Scenario orchestration: configuration, seeding, parallel Monte Carlo runs
//! and exports.

pub mod config;
pub mod experiment;
pub mod export;
pub mod scenario;
pub mod seed;

pub use config::{RunControl, SimConfig};
pub use experiment::{
    draw_run, run_cost_report, run_erasure_experiment, run_success_experiment, write_orbit_trace, DedupStats,
    ErasureOutcome, RunWorld, SuccessOutcome,
};
pub use export::Metadata;
pub use scenario::{MetricMode, Scenario, ScenarioSpec};
