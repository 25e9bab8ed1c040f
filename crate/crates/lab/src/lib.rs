//! Batch experiment harness for cusp eigenvalue counting: configuration,
//! λ-sweeps comparing the counting routes with the asymptotic predictions,
//! convergence studies and CSV/JSON reports.

pub mod config;
pub mod error;
pub mod experiment;
pub mod report;
pub mod sweep;

pub use config::{ExperimentConfig, Route, Suite};
pub use error::{LabError, Result};
