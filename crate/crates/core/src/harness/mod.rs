//! Scenario configuration, presets, runs and output.

pub mod config;
pub mod output;
pub mod preset;
pub mod run;

pub use config::{ConfigError, ConfigIssue, OutputConfig, ScenarioConfig, SweepSpec, TopologyConfig};
pub use output::{run_csvs, sweep_csvs, write_files, CsvFiles};
pub use preset::{preset, preset_names, UnknownPreset};
pub use run::{build_simulation, flow_setups, run_scenario, run_sweep, RunReport, SweepAggregate, SweepPoint, SweepReport};
