//! Structured symmetric positive-definite covariance engine.
//!
//! Filters in this crate keep covariances either diagonal or diagonal plus at
//! most two signed rank-one terms, so every operation below is `O(n)` except
//! on the [`DenseCov`] variant.

mod dense;
mod diag;
mod lowrank;
mod secular;

pub use dense::DenseCov;
pub use diag::DiagCov;
pub use lowrank::{DiagPlusLowRank, Factored, RankOne, MAX_TERMS};
pub use secular::min_eig_diag_plus_rank1;

use crate::error::{check_dim, Error, Result};
use crate::vector::dot;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Covariance<T> {
    Dense(DenseCov<T>),
    Diag(DiagCov<T>),
    LowRank(DiagPlusLowRank<T>),
}

impl<T: Scalar> From<DiagCov<T>> for Covariance<T> {
    fn from(d: DiagCov<T>) -> Self {
        Covariance::Diag(d)
    }
}

impl<T: Scalar> From<DiagPlusLowRank<T>> for Covariance<T> {
    fn from(p: DiagPlusLowRank<T>) -> Self {
        Covariance::LowRank(p)
    }
}

impl<T: Scalar> From<DenseCov<T>> for Covariance<T> {
    fn from(p: DenseCov<T>) -> Self {
        Covariance::Dense(p)
    }
}

impl<T: Scalar> Covariance<T> {
    pub fn dim(&self) -> usize {
        match self {
            Covariance::Dense(p) => p.dim(),
            Covariance::Diag(p) => p.dim(),
            Covariance::LowRank(p) => p.dim(),
        }
    }

    /// Marginal variances.
    pub fn diag(&self) -> Vec<T> {
        match self {
            Covariance::Dense(p) => p.diag(),
            Covariance::Diag(p) => p.values().to_vec(),
            Covariance::LowRank(p) => p.diag(),
        }
    }

    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim(), v.len())?;
        Ok(match self {
            Covariance::Dense(p) => p.matvec(v),
            Covariance::Diag(p) => p.matvec(v),
            Covariance::LowRank(p) => p.matvec(v),
        })
    }

    /// `vᵀ P v`
    pub fn quad_form(&self, v: &[T]) -> Result<T> {
        check_dim(self.dim(), v.len())?;
        Ok(match self {
            Covariance::Dense(p) => p.quad_form(v),
            Covariance::Diag(p) => p.quad_form(v),
            Covariance::LowRank(p) => p.quad_form(v),
        })
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim(), b.len())?;
        match self {
            Covariance::Dense(p) => p.solve(b),
            Covariance::Diag(p) => Ok(p.solve(b)),
            Covariance::LowRank(p) => p.solve(b),
        }
    }

    pub fn logdet(&self) -> Result<T> {
        match self {
            Covariance::Dense(p) => p.logdet(),
            Covariance::Diag(p) => Ok(p.logdet()),
            Covariance::LowRank(p) => p.logdet(),
        }
    }

    /// Diagonal of `P⁻¹`.
    pub fn inverse_diag(&self) -> Result<Vec<T>> {
        match self {
            Covariance::Dense(p) => Ok(p.inverse()?.diag()),
            Covariance::Diag(p) => Ok(p.values().iter().map(|d| d.recip()).collect()),
            Covariance::LowRank(p) => Ok(p.factor()?.inverse.diag()),
        }
    }

    /// `tr(self⁻¹ · other)` without forming either matrix when both are structured.
    pub fn trace_solve(&self, other: &Covariance<T>) -> Result<T> {
        check_dim(self.dim(), other.dim())?;
        match self {
            Covariance::Diag(q) => Ok(other.diag().iter().zip(q.values()).map(|(&p, &d)| p / d).sum()),
            Covariance::LowRank(q) => {
                let inv = q.factor()?.inverse;
                let mut acc: T = other.diag().iter().zip(inv.base()).map(|(&p, &w)| p * w).sum();
                for t in inv.terms() {
                    acc += t.weight * other.quad_form(&t.u)?;
                }
                Ok(acc)
            }
            Covariance::Dense(q) => {
                let inv = q.inverse()?;
                let p = other.to_dense();
                let n = self.dim();
                let mut acc = T::zero();
                for i in 0..n {
                    for j in 0..n {
                        acc += inv.get(i, j) * p.get(j, i);
                    }
                }
                Ok(acc)
            }
        }
    }

    pub fn to_dense(&self) -> DenseCov<T> {
        match self {
            Covariance::Dense(p) => p.clone(),
            Covariance::Diag(p) => DenseCov::from_diag(p.values()),
            Covariance::LowRank(p) => {
                let n = p.dim();
                let mut a = p.to_dense();
                // exact symmetry after accumulation order differences
                for i in 0..n {
                    for j in (i + 1)..n {
                        a[j * n + i] = a[i * n + j];
                    }
                }
                DenseCov::new(n, a).expect("symmetrized expansion")
            }
        }
    }

    /// Smallest eigenvalue. `O(n)` for diagonal and diagonal-plus-rank-one,
    /// dense Jacobi sweeps otherwise.
    pub fn min_eig(&self) -> Result<T> {
        match self {
            Covariance::Diag(p) => Ok(p.min()),
            Covariance::LowRank(p) if p.rank() == 0 => Ok(p.base().iter().fold(T::infinity(), |m, &v| m.min(v))),
            Covariance::LowRank(p) if p.rank() == 1 => {
                let t = &p.terms()[0];
                min_eig_diag_plus_rank1(p.base(), t.weight, &t.u)
            }
            _ => Ok(jacobi_eigenvalues(&self.to_dense()).into_iter().fold(T::infinity(), |m, v| m.min(v))),
        }
    }
}

/// Result of assimilating one scalar observation `y = xᵀθ + η`, `η ~ N(0, R)`.
#[derive(Debug, Clone)]
pub struct KalmanUpdate<T> {
    pub gain: Vec<T>,
    pub posterior: Covariance<T>,
    /// `xᵀPx + R`
    pub innovation_var: T,
}

/// Kalman gain `Px / (xᵀPx + R)` and innovation variance, without the posterior.
pub fn kalman_gain<T: Scalar>(prior: &Covariance<T>, x: &[T], meas_var: T) -> Result<(Vec<T>, T)> {
    if !(meas_var > T::zero()) {
        return Err(Error::InvalidArgument(format!("measurement variance must be positive, got {meas_var}")));
    }
    let px = prior.matvec(x)?;
    let s = dot(x, &px) + meas_var;
    let gain = px.iter().map(|&v| v / s).collect();
    Ok((gain, s))
}

/// Exact rank-one Kalman covariance update
/// `P⁺ = P − (Px)(Px)ᵀ / (xᵀPx + R)`.
///
/// A diagonal prior yields a diagonal-plus-rank-one posterior, a structured
/// prior with `k` terms yields `k + 1` (capacity error past [`MAX_TERMS`]),
/// and a dense prior stays dense.
pub fn kf_update<T: Scalar>(prior: &Covariance<T>, x: &[T], meas_var: T) -> Result<KalmanUpdate<T>> {
    if !(meas_var > T::zero()) {
        return Err(Error::InvalidArgument(format!("measurement variance must be positive, got {meas_var}")));
    }
    let px = prior.matvec(x)?;
    let s = dot(x, &px) + meas_var;
    let gain: Vec<T> = px.iter().map(|&v| v / s).collect();
    let w = -s.recip();
    let posterior = match prior {
        Covariance::Dense(p) => Covariance::Dense(p.rank_one_update(w, &px)),
        Covariance::Diag(p) => {
            let mut out = DiagPlusLowRank::from_diag(p.clone());
            out.push_term(w, px)?;
            Covariance::LowRank(out)
        }
        Covariance::LowRank(p) => {
            let mut out = p.clone();
            out.push_term(w, px)?;
            Covariance::LowRank(out)
        }
    };
    Ok(KalmanUpdate { gain, posterior, innovation_var: s })
}

/// `λ_min(cand − P_KF)` where `P_KF` is the Kalman posterior from `prev`.
///
/// A strictly negative value certifies that the diagonal candidate is not an
/// upper bound of the exact posterior. For a random input `x` any candidate
/// strictly below `prev` in some coordinate fails almost surely.
pub fn sandwich_violation<T: Scalar>(prev: &DiagCov<T>, x: &[T], meas_var: T, cand: &DiagCov<T>) -> Result<T> {
    check_dim(prev.dim(), x.len())?;
    check_dim(prev.dim(), cand.dim())?;
    if !(meas_var > T::zero()) {
        return Err(Error::InvalidArgument(format!("measurement variance must be positive, got {meas_var}")));
    }
    if let Some(i) = cand.values().iter().zip(prev.values()).position(|(c, p)| c > p) {
        return Err(Error::InvalidArgument(format!("candidate exceeds previous covariance at coordinate {i}")));
    }
    // cand − P_KF = diag(cand − prev) + (Px)(Px)ᵀ / s
    let px = prev.matvec(x);
    let s = dot(x, &px) + meas_var;
    let shift: Vec<T> = cand.values().iter().zip(prev.values()).map(|(&c, &p)| c - p).collect();
    min_eig_diag_plus_rank1(&shift, s.recip(), &px)
}

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations.
pub(crate) fn jacobi_eigenvalues<T: Scalar>(m: &DenseCov<T>) -> Vec<T> {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        let scale: T = (0..n).map(|i| a[i * n + i] * a[i * n + i]).sum();
        if off <= T::epsilon() * T::epsilon() * scale.max(T::min_positive_value()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}
