use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::divergence::GaussianDist;
use crate::error::{check_dim, Error, Result};
use crate::vector::{dot, norm_sq};
use crate::Scalar;

/// Monte Carlo estimate of `E_p |log p(θ)/q(θ)|ʳ` and its standard error.
///
/// This is the `r`-th power of the 𝕃ʳ information pseudometric. Samples are
/// drawn through a dense Cholesky factor of `Σp`, so this is meant for small
/// `n` and for checking closed forms.
pub fn lr_mc_oracle<T: Scalar>(
    p: &GaussianDist<T>,
    q: &GaussianDist<T>,
    r: T,
    samples: usize,
    seed: u64,
) -> Result<(T, T)> {
    check_dim(p.dim(), q.dim())?;
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {samples}")));
    }
    if !(r >= T::one()) {
        return Err(Error::InvalidArgument(format!("exponent must be at least 1, got {r}")));
    }
    let n = p.dim();
    let dense_p = p.cov.to_dense();
    let l = dense_p.cholesky()?;
    let half = T::lit(0.5);
    let const_part = half * (q.cov.logdet()? - dense_p.logdet()?);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = vec![T::zero(); n];
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for k in 0..samples {
        for zi in z.iter_mut() {
            let v: f64 = rng.sample(StandardNormal);
            *zi = T::lit(v);
        }
        // θ − μq = (μp − μq) + L z
        let dq: Vec<T> =
            (0..n).map(|i| p.mean[i] - q.mean[i] + (0..=i).map(|j| l[i * n + j] * z[j]).sum::<T>()).collect();
        let log_ratio = const_part + half * (dot(&dq, &q.cov.solve(&dq)?) - norm_sq(&z));
        let v = log_ratio.abs().powf(r).to_f64_lossy();
        let delta = v - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok((T::lit(mean), T::lit((var / samples as f64).sqrt())))
}
