use crate::covariance::{kf_update, Covariance};
use crate::divergence::{ep_project, l2_project, L2Options};
use crate::error::{Error, Result};
use crate::filters::{update_mean, FilterState};
use crate::model::Observation;
use crate::Scalar;

fn require_diag<T: Scalar>(state: &FilterState<T>) -> Result<()> {
    match state.cov {
        Covariance::Diag(_) => Ok(()),
        _ => Err(Error::InvalidArgument(format!("{} filter expects a diagonal covariance", state.kind))),
    }
}

/// Exact Kalman update on the dense covariance.
pub fn kalman_dense_step<T: Scalar>(
    mut state: FilterState<T>,
    obs: &Observation<T>,
    meas_var: T,
) -> Result<FilterState<T>> {
    if !matches!(state.cov, Covariance::Dense(_)) {
        state.cov = Covariance::Dense(state.cov.to_dense());
    }
    let up = kf_update(&state.cov, &obs.x, meas_var)?;
    state.mean = update_mean(&state.mean, &up.gain, obs);
    state.cov = up.posterior;
    state.step += 1;
    Ok(state)
}

/// Kalman update from the diagonal prior, then keep the marginal variances.
pub fn vi_ep_step<T: Scalar>(mut state: FilterState<T>, obs: &Observation<T>, meas_var: T) -> Result<FilterState<T>> {
    require_diag(&state)?;
    let up = kf_update(&state.cov, &obs.x, meas_var)?;
    state.mean = update_mean(&state.mean, &up.gain, obs);
    state.cov = Covariance::Diag(ep_project(&up.posterior)?);
    state.step += 1;
    Ok(state)
}

/// Kalman update from the diagonal prior, then the 𝕃²-closest diagonal,
/// warm-started at the marginal variances.
pub fn l2_step<T: Scalar>(
    mut state: FilterState<T>,
    obs: &Observation<T>,
    meas_var: T,
    opts: &L2Options<T>,
) -> Result<FilterState<T>> {
    require_diag(&state)?;
    let up = kf_update(&state.cov, &obs.x, meas_var)?;
    state.mean = update_mean(&state.mean, &up.gain, obs);
    let start = ep_project(&up.posterior)?;
    let proj = l2_project(&up.posterior, Some(&start), opts)?;
    if !proj.converged {
        state.unconverged_projections += 1;
    }
    state.cov = Covariance::Diag(proj.d);
    state.step += 1;
    Ok(state)
}
