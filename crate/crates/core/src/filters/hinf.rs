//! H∞ measurement update on a diagonal prior and its feasibility bound.
//!
//! With `S = I` the robust posterior is
//! `P = [P̃⁻¹ − γI + x xᵀ/R]⁻¹` and the gain is `K = P x / R`. For a diagonal
//! prior this is a diagonal core `A = diag(1/dᵢ − γ)` plus a rank-one
//! precision update, inverted by Sherman–Morrison. The bracket
//! `γ < λ_min(P̃⁻¹ + x xᵀ/R)` keeps the corrected precision positive definite.

use crate::covariance::{kalman_gain, min_eig_diag_plus_rank1, Covariance, DiagCov, DiagPlusLowRank, RankOne};
use crate::error::{check_dim, Error, Result};
use crate::vector::{dot, norm_sq};
use crate::Scalar;

#[derive(Debug, Clone)]
pub struct HinfUpdate<T> {
    pub gain: Vec<T>,
    pub posterior: DiagPlusLowRank<T>,
}

fn check_inputs<T: Scalar>(prior_d: &DiagCov<T>, x: &[T], meas_var: T) -> Result<()> {
    check_dim(prior_d.dim(), x.len())?;
    if !(meas_var > T::zero()) {
        return Err(Error::InvalidArgument(format!("measurement variance must be positive, got {meas_var}")));
    }
    Ok(())
}

/// Largest admissible robustness level: `λ_min(diag(1/d) + x xᵀ/R)`.
pub fn gamma_max<T: Scalar>(prior_d: &DiagCov<T>, x: &[T], meas_var: T) -> Result<T> {
    check_inputs(prior_d, x, meas_var)?;
    let precision: Vec<T> = prior_d.values().iter().map(|d| d.recip()).collect();
    min_eig_diag_plus_rank1(&precision, meas_var.recip(), x)
}

/// H∞ posterior and gain at robustness level `gamma`.
///
/// `gamma = 0` reproduces the Kalman update. Levels at or beyond
/// [`gamma_max`] are rejected as infeasible.
pub fn hinf_gain<T: Scalar>(prior_d: &DiagCov<T>, x: &[T], meas_var: T, gamma: T) -> Result<HinfUpdate<T>> {
    check_inputs(prior_d, x, meas_var)?;
    if !(gamma >= T::zero()) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be non-negative and finite, got {gamma}")));
    }
    let bound = gamma_max(prior_d, x, meas_var)?;
    if !(gamma < bound) {
        return Err(Error::Infeasible { gamma: gamma.to_f64_lossy(), bound: bound.to_f64_lossy() });
    }
    let d = prior_d.values();
    let core: Vec<T> = d.iter().map(|&di| T::one() - gamma * di).collect();

    let posterior = if core.iter().all(|&c| c > T::zero()) {
        // A⁻¹ = diag(d / (1 − γd)); P = A⁻¹ − (A⁻¹x)(A⁻¹x)ᵀ / (R + xᵀA⁻¹x)
        let inv_a: Vec<T> = d.iter().zip(&core).map(|(&di, &c)| di / c).collect();
        let u: Vec<T> = inv_a.iter().zip(x).map(|(&a, &xi)| a * xi).collect();
        let s = meas_var + dot(&u, x);
        DiagPlusLowRank::from_parts_unchecked(inv_a, vec![RankOne { weight: -s.recip(), u }])
    } else {
        // Interlacing leaves at most one non-positive core entry k below the
        // bound. Restore it to 1/d_k in the base and subtract γ e_k e_kᵀ from
        // the precision afterwards as a second, positive covariance term.
        let k = core
            .iter()
            .enumerate()
            .filter(|(_, &c)| !(c > T::zero()))
            .map(|(i, _)| i)
            .next()
            .expect("non-positive core entry");
        let mut base: Vec<T> = d.iter().zip(&core).map(|(&di, &c)| di / c).collect();
        base[k] = d[k];
        let u1: Vec<T> = base.iter().zip(x).map(|(&a, &xi)| a * xi).collect();
        let s = meas_var + dot(&u1, x);
        let c1 = -s.recip();
        // v = B⁻¹ e_k
        let mut v: Vec<T> = u1.iter().map(|&ui| c1 * ui * u1[k]).collect();
        v[k] += base[k];
        let denom = T::one() - gamma * v[k];
        if !(denom > T::zero()) {
            return Err(Error::Infeasible { gamma: gamma.to_f64_lossy(), bound: bound.to_f64_lossy() });
        }
        if base.iter().any(|&b| !(b > T::zero() && b.is_finite())) {
            return Err(Error::Singular("H-infinity core is not invertible".into()));
        }
        DiagPlusLowRank::from_parts_unchecked(
            base,
            vec![RankOne { weight: c1, u: u1 }, RankOne { weight: gamma / denom, u: v }],
        )
    };
    let r_inv = meas_var.recip();
    let gain = posterior.matvec(x).into_iter().map(|v| v * r_inv).collect();
    Ok(HinfUpdate { gain, posterior })
}

/// Gain alone, `O(n)` without building the posterior when the core is positive.
pub(crate) fn hinf_gain_only<T: Scalar>(prior_d: &DiagCov<T>, x: &[T], meas_var: T, gamma: T) -> Result<Vec<T>> {
    let d = prior_d.values();
    if d.iter().all(|&di| T::one() - gamma * di > T::zero()) && gamma >= T::zero() {
        check_inputs(prior_d, x, meas_var)?;
        // K = A⁻¹x / (R + xᵀA⁻¹x)
        let u: Vec<T> = d.iter().zip(x).map(|(&di, &xi)| di / (T::one() - gamma * di) * xi).collect();
        let s = meas_var + dot(&u, x);
        Ok(u.into_iter().map(|v| v / s).collect())
    } else {
        Ok(hinf_gain(prior_d, x, meas_var, gamma)?.gain)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaChoice<T> {
    pub gamma: T,
    /// `‖K_H∞(γ) − K_ref‖₂` at the chosen level.
    pub mismatch: T,
    pub upper: T,
}

/// Robustness level on `[0, upper]` whose H∞ gain from the projected diagonal
/// `p_lr` best matches the Kalman gain of the exact posterior `p_kf` at the
/// next input. Golden-section search to relative interval tolerance `1e-8`;
/// the bracket end points are candidates too.
pub fn optimize_gamma<T: Scalar>(
    p_lr: &DiagCov<T>,
    p_kf: &Covariance<T>,
    x_next: &[T],
    meas_var: T,
    upper: T,
) -> Result<GammaChoice<T>> {
    let (k_ref, _) = kalman_gain(p_kf, x_next, meas_var)?;
    check_dim(p_lr.dim(), k_ref.len())?;
    let mismatch = |g: T| -> Result<T> {
        let k = hinf_gain_only(p_lr, x_next, meas_var, g)?;
        Ok(norm_sq(&crate::vector::sub(&k, &k_ref)).sqrt())
    };
    let upper = upper.max(T::zero());
    let (gamma, value) = golden_section_min(mismatch, T::zero(), upper, T::lit(1e-8))?;
    Ok(GammaChoice { gamma, mismatch: value, upper })
}

/// Minimizes a scalar function on `[lo, hi]`; returns the best point seen,
/// end points included. Ties go to the earlier (lower) candidate.
pub fn golden_section_min<T: Scalar>(mut f: impl FnMut(T) -> Result<T>, lo: T, hi: T, rel_tol: T) -> Result<(T, T)> {
    let f_lo = f(lo)?;
    if !(hi > lo) {
        return Ok((lo, f_lo));
    }
    let f_hi = f(hi)?;
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let width = hi - lo;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if b - a <= rel_tol * width {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let mut best = (lo, f_lo);
    for cand in [(c, fc), (d, fd), (hi, f_hi)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    Ok(best)
}
