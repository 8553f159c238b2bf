//! Configuration, experiment presets and the command-line interface.

pub mod cli;
pub mod config;
pub mod presets;

pub use cli::{cli_main, exit_code};
pub use config::{ExperimentConfig, WorkloadFamily, WorkloadSpec};
pub use presets::{adversarial_counts, run_preset, PresetKind, PresetRow, PresetTable, SeedCell};
