//! Sequential filters for high-dimensional linear-Gaussian parameter estimation.
//!
//! Five filters share one assimilation interface: the exact dense Kalman
//! filter, mean-field variational filters that project each Kalman posterior
//! onto diagonal covariances (forward-KL and 𝕃² information-pseudometric
//! projections), and their H∞-corrected counterparts whose robustness level
//! is tuned each step to match the one-step-exact Kalman gain.
//!
//! Structured filters never form an `n × n` matrix: covariances are diagonal
//! or diagonal plus at most two rank-one terms, so each step is `O(n)`.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod covariance;
pub mod divergence;
pub mod error;
pub mod filters;
pub mod model;
mod scalar;
pub mod vector;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type DiagCov64 = covariance::DiagCov<f64>;
pub type DiagPlusLowRank64 = covariance::DiagPlusLowRank<f64>;
pub type DenseCov64 = covariance::DenseCov<f64>;
pub type Covariance64 = covariance::Covariance<f64>;
pub type GaussianDist64 = divergence::GaussianDist<f64>;
pub type ProblemSpec64 = model::ProblemSpec<f64>;
pub type GroundTruth64 = model::GroundTruth<f64>;
pub type Observation64 = model::Observation<f64>;
pub type Filter64 = filters::Filter<f64>;
pub type FilterState64 = filters::FilterState<f64>;
pub type HinfConfig64 = filters::HinfConfig<f64>;
