//! Optimally weighted model averaging for scalar mean estimation.
//!
//! A local agent estimates `E[X]` from `n_x` samples and may blend its
//! empirical mean with a helper's mean `Ȳ` (another agent, a federation of
//! agents, or a fixed anchor). This crate provides the closed-form error of
//! every blend weight, the optimal weight and its bounds, a Monte Carlo
//! oracle to check them, and the batch commands behind the `collab-avg` CLI.

// Checks are written as `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod distributions;
pub mod estimation;
pub mod federation;
pub mod montecarlo;
pub mod report;
pub mod suite;
pub mod theory;

pub use distributions::{DistributionSpec, SeedSpec};
pub use federation::{Agent, FederationScenario};
pub use montecarlo::{HelperModel, MonteCarloEstimate};
pub use theory::{ErrorProfile, Extended, SampleCount, Scenario};
