//! Experiment runner: configuration, orchestration and result emission.

pub mod config;
pub mod error;
pub mod experiments;
pub mod table;

pub use config::{ConfigOverrides, Experiment, ExperimentConfig, StartScheme};
pub use error::CliError;
pub use experiments::{figure_config, run_ed, run_experiment, run_vqe, FIGURES};
pub use table::{emit, write_table, Format, Manifest, ResultTable, Row, COLUMNS};
