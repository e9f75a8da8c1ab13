//! Disease and economic burden model for lung cancer.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`bundle`] loads and validates a scenario directory.
//! 2. [`epidemiology`] builds incident and prevalent case matrices and splits deaths.
//! 3. [`health_loss`] turns deaths and cases into YLL, YLD and DALYs.
//! 4. [`costing`] builds per-patient annual cost cards and per-death costs.
//! 5. [`burden`] multiplies counts by costs into the national report.
//!
//! [`uncertainty`] re-runs stages 2-5 under sampled factors, and [`report`]
//! renders results as CSV, JSON or Markdown.

pub mod bundle;
pub mod burden;
pub mod cli;
pub mod costing;
pub mod epidemiology;
pub mod error;
pub mod health_loss;
pub mod model;
pub mod report;
pub mod uncertainty;

pub use bundle::{load_bundle, validate_bundle, ScenarioBundle};
pub use burden::{evaluate, prepare, BurdenReport, Perturbation, PreparedModel};
pub use error::{BundleError, ModelError};
pub use uncertainty::{simulate, SimulationSummary, UncertaintySpec};
