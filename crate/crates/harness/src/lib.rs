//! Experiment harness for the `varfilt-core` filters: metrics, seeded sweeps,
//! trace and ellipse experiments, and their CSV/SVG outputs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod ellipse;
pub mod error;
pub mod metrics;
pub mod svg;
pub mod sweep;

pub use error::{HarnessError, Result};
pub use metrics::{hinf_cost, mse, run_filter, wcse, RunMetrics};
pub use sweep::{sweep, SweepConfig, SweepRecord};
