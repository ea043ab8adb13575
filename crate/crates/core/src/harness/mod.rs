//! Experiment configuration, seeded sweeps, rate fits and the CLI.

pub mod cli;
pub mod config;
pub mod fixtures;
pub mod slope;
pub mod sweep;
pub mod trial;
pub mod validate;

pub use cli::cli_main;
pub use config::{preset, ExperimentConfig, PRESET_NAMES};
pub use fixtures::{fixture_matrices, write_fixtures};
pub use slope::{fit_metric_slope, fit_rate_slope, median, median_by_n, SlopeFit};
pub use sweep::{run_sweep, run_sweep_to_path, SweepOptions, TrialTable, TrialWriter, SCHEMA_LINE};
pub use trial::{cell_seed, metric_columns, run_trial, PhaseTimings, TrialRecord};
pub use validate::{feasibility_report, FeasibilityReport, FeasibilityRow};
