use crate::covariance::{Covariance, DiagCov};
use crate::error::Result;
use crate::Scalar;

/// Forward-KL (`D(p‖q)`) optimal diagonal: the marginal variances of `p`.
pub fn ep_project<T: Scalar>(post_cov: &Covariance<T>) -> Result<DiagCov<T>> {
    DiagCov::new(post_cov.diag())
}

/// Reverse-KL (`D(q‖p)`, ELBO) optimal diagonal: `dᵢ = 1 / (P⁻¹)ᵢᵢ`.
///
/// Never larger than the forward-KL variances, since `(P⁻¹)ᵢᵢ ≥ 1 / Pᵢᵢ`.
pub fn elbo_project<T: Scalar>(post_cov: &Covariance<T>) -> Result<DiagCov<T>> {
    DiagCov::new(post_cov.inverse_diag()?.into_iter().map(|v| v.recip()).collect())
}
