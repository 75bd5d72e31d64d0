//! Reproducible numerical experiments on isometries of the infinite-dimensional
//! hyperbolic space and of the separable Hilbert space.
//!
//! Every experiment takes an [`ExperimentConfig`], runs its trials in
//! parallel with one seeded generator per trial and returns a [`Report`] whose
//! content is independent of scheduling.

pub mod config;
pub mod experiments;
pub mod oracles;
pub mod report;

pub use config::{ConfigError, ExperimentConfig, Tolerances};
pub use experiments::Experiment;
pub use report::{Aggregate, Report, TrialRecord};
