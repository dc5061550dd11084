//! Experiment configuration, the Monte Carlo harness and the `sparsefn`
//! command line on top of [`sparsefn_core`].

pub mod cli;
pub mod config;
pub mod output;
pub mod sim;
pub mod stats;

pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use sim::{simulate, SimError, SimulationReport};

/// Version stamped into every emitted artifact.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
