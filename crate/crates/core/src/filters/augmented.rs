//! Robust variational step with a deferred, gain-matched H∞ correction.
//!
//! At step `t` the filter has the projected diagonal `P_Lr` and the exact
//! one-step posterior `P_KF` from step `t − 1`. When `(x_t, y_t)` arrives:
//!
//! 1. pick `γ*` so the H∞ gain from `P_Lr` at `x_t` matches the Kalman gain
//!    from `P_KF` at `x_t`, and turn `P_Lr` into the corrected prior;
//! 2. run the Kalman update from that prior, moving the mean with its gain;
//! 3. project the posterior onto diagonals (forward KL or 𝕃²);
//! 4. keep `(P_Lr, P_KF, x_t)` for the next arrival.
//!
//! The first step has nothing to correct and is a plain projected Kalman step.

use crate::covariance::{kf_update, Covariance, DiagCov};
use crate::divergence::{ep_project, l2_project, L2Options};
use crate::error::{Error, Result};
use crate::filters::hinf::{gamma_max, hinf_gain, optimize_gamma};
use crate::filters::{update_mean, CorrectionForm, FilterState, HinfConfig};
use crate::model::Observation;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projector {
    ForwardKl,
    L2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PendingCorrection<T> {
    pub projected: DiagCov<T>,
    pub exact: Covariance<T>,
    pub x_prev: Vec<T>,
}

/// Upper end of the `γ` search bracket for the configured correction.
pub fn correction_upper_bound<T: Scalar>(
    cfg: &HinfConfig<T>,
    pending: &PendingCorrection<T>,
    x_next: &[T],
    meas_var: T,
) -> Result<T> {
    let d = &pending.projected;
    let core_bound = d.max().recip();
    let bound = match cfg.correction {
        CorrectionForm::PriorInflation => core_bound,
        CorrectionForm::LiteralInput | CorrectionForm::NextInput => {
            let mut b = gamma_max(d, x_next, meas_var)?;
            if cfg.correction == CorrectionForm::LiteralInput {
                b = b.min(gamma_max(d, &pending.x_prev, meas_var)?);
            }
            b.min(core_bound)
        }
    };
    Ok((T::one() - cfg.gamma_eps) * bound)
}

fn corrected_prior<T: Scalar>(
    pending: &PendingCorrection<T>,
    x_next: &[T],
    meas_var: T,
    cfg: &HinfConfig<T>,
) -> Result<(T, Covariance<T>)> {
    let upper = correction_upper_bound(cfg, pending, x_next, meas_var)?;
    let choice = optimize_gamma(&pending.projected, &pending.exact, x_next, meas_var, upper)?;
    let gamma = choice.gamma;
    let cov = match cfg.correction {
        CorrectionForm::PriorInflation => {
            let inflated = pending.projected.values().iter().map(|&d| d / (T::one() - gamma * d)).collect();
            Covariance::Diag(DiagCov::new(inflated)?)
        }
        CorrectionForm::LiteralInput | CorrectionForm::NextInput => {
            let x_c = if cfg.correction == CorrectionForm::LiteralInput { &pending.x_prev[..] } else { x_next };
            let post = hinf_gain(&pending.projected, x_c, meas_var, gamma)?.posterior;
            if cfg.diagonalize_posterior {
                Covariance::Diag(DiagCov::new(post.diag())?)
            } else {
                Covariance::LowRank(post)
            }
        }
    };
    Ok((gamma, cov))
}

pub fn augmented_step<T: Scalar>(
    mut state: FilterState<T>,
    obs: &Observation<T>,
    meas_var: T,
    cfg: &HinfConfig<T>,
    projector: Projector,
    l2_opts: &L2Options<T>,
) -> Result<FilterState<T>> {
    cfg.validate()?;
    let prior = match state.pending.take() {
        Some(pending) => {
            let (gamma, cov) = corrected_prior(&pending, &obs.x, meas_var, cfg)?;
            state.gamma_trace.push(gamma);
            cov
        }
        None => match &state.cov {
            Covariance::Diag(_) => state.cov.clone(),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "{} filter expects a diagonal covariance at its first step",
                    state.kind
                )))
            }
        },
    };

    let up = kf_update(&prior, &obs.x, meas_var)?;
    state.mean = update_mean(&state.mean, &up.gain, obs);
    let start = ep_project(&up.posterior)?;
    let projected = match projector {
        Projector::ForwardKl => start,
        Projector::L2 => {
            let p = l2_project(&up.posterior, Some(&start), l2_opts)?;
            if !p.converged {
                state.unconverged_projections += 1;
            }
            p.d
        }
    };
    state.cov = Covariance::Diag(projected.clone());
    state.pending = Some(PendingCorrection { projected, exact: up.posterior, x_prev: obs.x.clone() });
    state.step += 1;
    Ok(state)
}
