//! The five sequential filters behind one assimilation interface.
//!
//! | kind        | covariance carried        | per-step update                              |
//! |-------------|---------------------------|----------------------------------------------|
//! | KalmanDense | dense `n × n`             | exact Kalman                                 |
//! | ViEp        | diagonal                  | Kalman, then forward-KL (marginal) projection |
//! | L2          | diagonal                  | Kalman, then 𝕃² pseudometric projection      |
//! | ViHinf      | diagonal + pending state  | gain-matched H∞ correction, Kalman, forward KL |
//! | L2Hinf      | diagonal + pending state  | gain-matched H∞ correction, Kalman, 𝕃²       |
//!
//! All kinds update the mean with the Kalman gain computed from their own prior.

mod augmented;
mod hinf;
mod steps;

pub use augmented::{augmented_step, correction_upper_bound, PendingCorrection, Projector};
pub use hinf::{gamma_max, golden_section_min, hinf_gain, optimize_gamma, GammaChoice, HinfUpdate};
pub use steps::{kalman_dense_step, l2_step, vi_ep_step};

use std::fmt;
use std::str::FromStr;

use crate::covariance::{Covariance, DenseCov, DiagCov};
use crate::divergence::L2Options;
use crate::error::{check_dim, Error, Result};
use crate::model::Observation;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FilterKind {
    KalmanDense,
    ViEp,
    L2,
    ViHinf,
    L2Hinf,
}

impl FilterKind {
    pub const ALL: [FilterKind; 5] =
        [FilterKind::KalmanDense, FilterKind::ViEp, FilterKind::L2, FilterKind::ViHinf, FilterKind::L2Hinf];

    /// Short command-line name.
    pub fn short_name(self) -> &'static str {
        match self {
            FilterKind::KalmanDense => "kf",
            FilterKind::ViEp => "viep",
            FilterKind::L2 => "l2",
            FilterKind::ViHinf => "vih",
            FilterKind::L2Hinf => "l2h",
        }
    }

    pub fn is_hinf(self) -> bool {
        matches!(self, FilterKind::ViHinf | FilterKind::L2Hinf)
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FilterKind::ALL
            .into_iter()
            .find(|k| k.short_name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown filter `{s}` (expected kf, viep, l2, vih, l2h)")))
    }
}

/// How the gain-matched robustness level turns into the next prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrectionForm {
    /// `diag(dᵢ / (1 − γ dᵢ))`: the projected covariance with the robustness
    /// term removed from its precision. The next Kalman step from this prior
    /// uses exactly the matched H∞ gain.
    #[default]
    PriorInflation,
    /// Full H∞ posterior re-using the input that produced the projection.
    LiteralInput,
    /// Full H∞ posterior using the incoming input.
    NextInput,
}

impl FromStr for CorrectionForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inflate" => Ok(CorrectionForm::PriorInflation),
            "literal" => Ok(CorrectionForm::LiteralInput),
            "next" => Ok(CorrectionForm::NextInput),
            _ => Err(Error::InvalidArgument(format!("unknown correction `{s}` (expected inflate, literal, next)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HinfConfig<T> {
    /// Fraction of the feasibility bound kept as margin; `1` forces `γ = 0`.
    pub gamma_eps: T,
    pub correction: CorrectionForm,
    /// Replace the corrected covariance by its diagonal before the next step.
    pub diagonalize_posterior: bool,
}

impl<T: Scalar> Default for HinfConfig<T> {
    fn default() -> Self {
        Self { gamma_eps: T::lit(1e-3), correction: CorrectionForm::default(), diagonalize_posterior: true }
    }
}

impl<T: Scalar> HinfConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_eps > T::zero() && self.gamma_eps <= T::one()) {
            return Err(Error::InvalidArgument(format!("gamma_eps must lie in (0, 1], got {}", self.gamma_eps)));
        }
        Ok(())
    }
}

/// Filter belief after some number of observations. Owned; every step
/// consumes one state and returns the next.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState<T> {
    pub kind: FilterKind,
    pub mean: Vec<T>,
    pub cov: Covariance<T>,
    /// Deferred H∞ correction, present for H∞ kinds after the first step.
    pub pending: Option<PendingCorrection<T>>,
    pub step: usize,
    /// Robustness level chosen at each correction.
    pub gamma_trace: Vec<T>,
    /// 𝕃² projections that hit the iteration cap (best iterate was used).
    pub unconverged_projections: usize,
}

impl<T: Scalar> FilterState<T> {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Marginal variances of the current belief.
    pub fn variances(&self) -> Vec<T> {
        self.cov.diag()
    }
}

/// A configured filter: kind, measurement noise, and tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter<T> {
    pub kind: FilterKind,
    pub meas_var: T,
    pub hinf: HinfConfig<T>,
    pub l2: L2Options<T>,
}

impl<T: Scalar> Filter<T> {
    pub fn new(kind: FilterKind, meas_var: T) -> Result<Self> {
        if !(meas_var > T::zero() && meas_var.is_finite()) {
            return Err(Error::InvalidArgument(format!("measurement variance must be positive, got {meas_var}")));
        }
        Ok(Self { kind, meas_var, hinf: HinfConfig::default(), l2: L2Options::default() })
    }

    pub fn with_hinf(mut self, cfg: HinfConfig<T>) -> Result<Self> {
        cfg.validate()?;
        self.hinf = cfg;
        Ok(self)
    }

    pub fn with_l2_options(mut self, opts: L2Options<T>) -> Self {
        self.l2 = opts;
        self
    }

    /// Prior `N(prior_mean, prior_var · I)`.
    pub fn initial_state(&self, prior_mean: Vec<T>, prior_var: T) -> Result<FilterState<T>> {
        let n = prior_mean.len();
        let diag = DiagCov::isotropic(n, prior_var)?;
        let cov = match self.kind {
            FilterKind::KalmanDense => Covariance::Dense(DenseCov::from_diag(diag.values())),
            _ => Covariance::Diag(diag),
        };
        Ok(FilterState {
            kind: self.kind,
            mean: prior_mean,
            cov,
            pending: None,
            step: 0,
            gamma_trace: Vec::new(),
            unconverged_projections: 0,
        })
    }

    pub fn assimilate(&self, state: FilterState<T>, obs: &Observation<T>) -> Result<FilterState<T>> {
        if state.kind != self.kind {
            return Err(Error::InvalidArgument(format!("state of kind {} given to {} filter", state.kind, self.kind)));
        }
        check_dim(state.dim(), obs.x.len())?;
        let r = self.meas_var;
        match self.kind {
            FilterKind::KalmanDense => kalman_dense_step(state, obs, r),
            FilterKind::ViEp => vi_ep_step(state, obs, r),
            FilterKind::L2 => l2_step(state, obs, r, &self.l2),
            FilterKind::ViHinf => augmented_step(state, obs, r, &self.hinf, Projector::ForwardKl, &self.l2),
            FilterKind::L2Hinf => augmented_step(state, obs, r, &self.hinf, Projector::L2, &self.l2),
        }
    }
}

/// `μ + K (y − xᵀμ)`
pub(crate) fn update_mean<T: Scalar>(mean: &[T], gain: &[T], obs: &Observation<T>) -> Vec<T> {
    let innovation = obs.y - crate::vector::dot(&obs.x, mean);
    mean.iter().zip(gain).map(|(&m, &k)| m + k * innovation).collect()
}
