//! Divergences between Gaussians and the diagonal projections built on them.

mod l2;
mod montecarlo;
mod projection;

pub use l2::{l2_gradient, l2_objective, l2_project, l2_workspace, L2Options, L2Problem, L2Projection, L2Workspace};
pub use montecarlo::lr_mc_oracle;
pub use projection::{elbo_project, ep_project};

use crate::covariance::Covariance;
use crate::error::{check_dim, Result};
use crate::vector::{dot, sub};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDist<T> {
    pub mean: Vec<T>,
    pub cov: Covariance<T>,
}

impl<T: Scalar> GaussianDist<T> {
    pub fn new(mean: Vec<T>, cov: impl Into<Covariance<T>>) -> Result<Self> {
        let cov = cov.into();
        check_dim(cov.dim(), mean.len())?;
        Ok(Self { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// `D_KL(p ‖ q)` in closed form:
/// `½ (tr(Σq⁻¹Σp) − n + ‖μp − μq‖²_{Σq⁻¹} + log|Σq| − log|Σp|)`.
pub fn kl_gaussian<T: Scalar>(p: &GaussianDist<T>, q: &GaussianDist<T>) -> Result<T> {
    check_dim(p.dim(), q.dim())?;
    let n = T::from_usize(p.dim()).unwrap();
    let tr = q.cov.trace_solve(&p.cov)?;
    let delta = sub(&p.mean, &q.mean);
    let maha = dot(&delta, &q.cov.solve(&delta)?);
    let ld = q.cov.logdet()? - p.cov.logdet()?;
    // clamp round-off below zero
    Ok(((tr - n + maha + ld) * T::lit(0.5)).max(T::zero()))
}
