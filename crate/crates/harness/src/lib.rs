//! Experiment orchestration for betadt: Monte Carlo and deterministic checks
//! of the typical-cell laws, with structured CSV/JSON reports.
//!
//! Every experiment takes an [`ExperimentConfig`] and returns an
//! [`ExperimentReport`] whose verdicts name the acceptance criterion they
//! check. Reports contain no timings, so a rerun with the same config is
//! byte-identical.

pub mod config;
pub mod error;
pub mod experiments;
pub mod parallel;
pub mod report;
pub mod stats;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use experiments::*;
pub use report::{ExperimentReport, Fit, Table, Verdict, REPORT_SCHEMA_VERSION};
