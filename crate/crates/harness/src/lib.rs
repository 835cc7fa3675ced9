//! Orchestration of the mitigation experiments: configuration, parameter
//! sweeps, ranking summaries, file formats and reports.

pub mod config;
pub mod error;
pub mod io;
pub mod report;
pub mod run;
pub mod sweep;

pub use config::{ExperimentConfig, Preset, ShotMode};
pub use error::{HarnessError, Result};
pub use report::ReportFormat;
pub use run::{run_single, RunRecord};
pub use sweep::{run_sweep, summarize, SweepSummary};
