//! Accuracy metrics and single-run driver.

use std::time::Instant;

use varfilt_core::filters::{Filter, FilterKind, HinfConfig};
use varfilt_core::model::{stream, GroundTruth, ProblemSpec};
use varfilt_core::Error as CoreError;

use crate::error::{HarnessError, Result};

/// `(1/n) ‖estimate − truth‖²`
pub fn mse(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() || estimate.is_empty() {
        return Err(CoreError::DimensionMismatch { expected: truth.len(), actual: estimate.len() }.into());
    }
    let ss: f64 = estimate.iter().zip(truth).map(|(e, t)| (e - t) * (e - t)).sum();
    Ok(ss / estimate.len() as f64)
}

/// Worst-case scaled error `maxᵢ |estimateᵢ − truthᵢ| / √varᵢ`.
pub fn wcse(estimate: &[f64], truth: &[f64], var_diag: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() || estimate.len() != var_diag.len() {
        return Err(CoreError::DimensionMismatch { expected: truth.len(), actual: estimate.len() }.into());
    }
    let mut worst = 0.0f64;
    for ((e, t), &v) in estimate.iter().zip(truth).zip(var_diag) {
        if !(v > 0.0) {
            return Err(CoreError::InvalidArgument(format!("variance must be positive, got {v}")).into());
        }
        worst = worst.max((e - t).abs() / v.sqrt());
    }
    Ok(worst)
}

/// Realized H∞ cost ratio with `S = I` and no process noise:
/// `Σₜ ‖θ − θ̂ₜ‖² / (‖θ − μ₀‖²_{P₀⁻¹} + Σₜ ηₜ²/R)` over the given estimates.
pub fn hinf_cost(estimates: &[Vec<f64>], truth: &GroundTruth<f64>, spec: &ProblemSpec<f64>) -> Result<f64> {
    if estimates.len() > truth.noise_draws.len() {
        return Err(CoreError::InvalidArgument(format!(
            "{} estimates but only {} noise draws",
            estimates.len(),
            truth.noise_draws.len()
        ))
        .into());
    }
    let mut num = 0.0;
    for e in estimates {
        let m = mse(e, &truth.theta)?;
        num += m * truth.theta.len() as f64;
    }
    let den = initial_energy(truth, spec)
        + truth.noise_draws[..estimates.len()].iter().map(|eta| eta * eta / spec.meas_var).sum::<f64>();
    if !(den > 0.0) {
        return Err(CoreError::InvalidArgument("H-infinity cost has zero disturbance energy".into()).into());
    }
    Ok(num / den)
}

fn initial_energy(truth: &GroundTruth<f64>, spec: &ProblemSpec<f64>) -> f64 {
    truth.theta.iter().zip(&spec.prior_mean).map(|(t, m)| (t - m) * (t - m)).sum::<f64>() / spec.prior_var
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub final_mse: f64,
    pub final_wcse: f64,
    pub per_step_wcse: Vec<f64>,
    pub per_step_mse: Vec<f64>,
    pub runtime_ms: f64,
    /// Chosen robustness levels (H∞ kinds only).
    pub gamma_trace: Vec<f64>,
    pub hinf_cost: f64,
    pub final_mean: Vec<f64>,
    pub final_var: Vec<f64>,
    pub unconverged_projections: usize,
}

/// Assimilates the whole horizon in order and scores the belief after each step.
pub fn run_filter(
    spec: &ProblemSpec<f64>,
    truth: &GroundTruth<f64>,
    kind: FilterKind,
    cfg: &HinfConfig<f64>,
) -> Result<RunMetrics> {
    let filter = Filter::new(kind, spec.meas_var)?.with_hinf(cfg.clone())?;
    run_with(spec, truth, &filter)
}

pub fn run_with(spec: &ProblemSpec<f64>, truth: &GroundTruth<f64>, filter: &Filter<f64>) -> Result<RunMetrics> {
    let started = Instant::now();
    let kind = filter.kind;
    let mut state = filter.initial_state(spec.prior_mean.clone(), spec.prior_var)?;
    let mut per_step_wcse = Vec::with_capacity(spec.horizon);
    let mut per_step_mse = Vec::with_capacity(spec.horizon);
    let mut err_energy = 0.0;
    let mut noise_energy = 0.0;
    for t in 0..spec.horizon {
        let obs = stream(spec, truth, t)?;
        state = filter.assimilate(state, &obs).map_err(|source| HarnessError::Step { kind, step: t, source })?;
        let m = mse(&state.mean, &truth.theta)?;
        per_step_mse.push(m);
        per_step_wcse.push(wcse(&state.mean, &truth.theta, &state.variances())?);
        err_energy += m * spec.n as f64;
        noise_energy += truth.noise_draws[t] * truth.noise_draws[t] / spec.meas_var;
    }
    let final_var = state.variances();
    let final_mse = mse(&state.mean, &truth.theta)?;
    let final_wcse = wcse(&state.mean, &truth.theta, &final_var)?;
    let den = initial_energy(truth, spec) + noise_energy;
    Ok(RunMetrics {
        final_mse,
        final_wcse,
        per_step_wcse,
        per_step_mse,
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
        gamma_trace: state.gamma_trace.clone(),
        hinf_cost: if den > 0.0 { err_energy / den } else { f64::NAN },
        final_mean: state.mean,
        final_var,
        unconverged_projections: state.unconverged_projections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mse_cases() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn wcse_cases() {
        assert_eq!(wcse(&[1.0, 2.0], &[1.0, 2.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(wcse(&[2.0, 0.0], &[0.0, 0.0], &[4.0, 1.0]).unwrap(), 1.0);
        assert!(wcse(&[2.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn hinf_cost_scalar_hand_case() {
        let spec = ProblemSpec {
            n: 1,
            horizon: 1,
            xbar: vec![0.0],
            input_var: 0.5,
            meas_var: 0.1,
            prior_mean: vec![0.0],
            prior_var: 1.0,
            seed: 0,
        };
        let truth = GroundTruth { theta: vec![1.0], noise_draws: vec![0.1] };
        let est = 0.8;
        // (1 − 0.8)² / (1 + 0.01/0.1)
        assert_relative_eq!(hinf_cost(&[vec![est]], &truth, &spec).unwrap(), 0.04 / 1.1, max_relative = 1e-14);
        assert_eq!(hinf_cost(&[vec![1.0]], &truth, &spec).unwrap(), 0.0);
    }

    #[test]
    fn hinf_cost_zero_denominator() {
        let spec = ProblemSpec {
            n: 1,
            horizon: 1,
            xbar: vec![0.0],
            input_var: 0.5,
            meas_var: 0.1,
            prior_mean: vec![0.0],
            prior_var: 1.0,
            seed: 0,
        };
        let truth = GroundTruth { theta: vec![0.0], noise_draws: vec![0.0] };
        assert!(hinf_cost(&[vec![0.5]], &truth, &spec).is_err());
    }
}
