//! Experiment runner for weight evolution: TOML run configs, a model and
//! dataset registry, training runs with persisted metrics and checkpoints,
//! α sweeps, and SVG figures.

pub mod cli;
pub mod config;
pub mod error;
pub mod plot;
pub mod registry;
pub mod run;
pub mod summary;
pub mod sweep;

pub use config::{AlphaSetting, RunConfig, WeConfig};
pub use error::HarnessError;
pub use run::{run, run_single, MetricRecord, RunResult};
