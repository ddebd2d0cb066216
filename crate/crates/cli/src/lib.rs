//! Benchmark harness around `kdiff`: single runs, grid tuning, sensitivity
//! sweeps, KD/FKD cost benchmarks and synthetic data.

pub mod alloc;
pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod sweep;
pub mod tune;

pub use config::RunConfig;
pub use error::CliError;
