//! Confidence ellipses of a dense 2-D posterior and its diagonal projections.

use std::fmt::Write as _;

use varfilt_core::covariance::{Covariance, DenseCov};
use varfilt_core::divergence::{elbo_project, ep_project, l2_project, L2Options};
use varfilt_core::filters::{Filter, FilterKind};
use varfilt_core::model::{generate, stream, ProblemConfig};
use varfilt_core::Error;

use crate::error::Result;

/// Chi-square(2) quantile at `level`.
pub fn chi2_2_quantile(level: f64) -> f64 {
    -2.0 * (1.0 - level).ln()
}

/// `count` points on the `level` confidence ellipse of N(mean, cov).
pub fn ellipse_points(mean: [f64; 2], cov: &DenseCov<f64>, level: f64, count: usize) -> Result<Vec<[f64; 2]>> {
    if cov.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, actual: cov.dim() }.into());
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("level must lie in (0, 1), got {level}")).into());
    }
    let l = cov.cholesky()?;
    let r = chi2_2_quantile(level).sqrt();
    Ok((0..count)
        .map(|k| {
            let phi = std::f64::consts::TAU * k as f64 / count as f64;
            let (s, c) = phi.sin_cos();
            [mean[0] + r * l[0] * c, mean[1] + r * (l[2] * c + l[3] * s)]
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipseSet {
    pub method: &'static str,
    pub cov: DenseCov<f64>,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipseExperiment {
    pub seed: u64,
    pub obs: usize,
    pub level: f64,
    pub mean: [f64; 2],
    pub sets: Vec<EllipseSet>,
}

pub const ELLIPSE_POINTS: usize = 256;
pub const ELLIPSE_LEVEL: f64 = 0.9;

/// Assimilates `obs` observations of a seeded 2-D problem exactly, then projects
/// the posterior once with each diagonal method.
pub fn ellipse_experiment(seed: u64, obs: usize) -> Result<EllipseExperiment> {
    let (spec, truth) = generate::<f64>(&ProblemConfig::new(2, seed).horizon(obs))?;
    let filter = Filter::new(FilterKind::KalmanDense, spec.meas_var)?;
    let mut state = filter.initial_state(spec.prior_mean.clone(), spec.prior_var)?;
    for t in 0..obs {
        state = filter.assimilate(state, &stream(&spec, &truth, t)?)?;
    }
    let post = state.cov.clone();
    let mean = [state.mean[0], state.mean[1]];
    let ep = ep_project(&post)?;
    let elbo = elbo_project(&post)?;
    let l2 = l2_project(&post, Some(&ep), &L2Options::default())?.d;

    let mut sets = Vec::with_capacity(4);
    let mut add = |method, cov: Covariance<f64>| -> Result<()> {
        let dense = cov.to_dense();
        let points = ellipse_points(mean, &dense, ELLIPSE_LEVEL, ELLIPSE_POINTS)?;
        sets.push(EllipseSet { method, cov: dense, points });
        Ok(())
    };
    add("true", post)?;
    add("ep", ep.into())?;
    add("elbo", elbo.into())?;
    add("l2", l2.into())?;
    Ok(EllipseExperiment { seed, obs, level: ELLIPSE_LEVEL, mean, sets })
}

impl EllipseExperiment {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# seed={} obs={} level={}", self.seed, self.obs, self.level);
        s.push_str("method,index,x,y\n");
        for set in &self.sets {
            for (i, p) in set.points.iter().enumerate() {
                let _ = writeln!(s, "{},{},{:.16e},{:.16e}", set.method, i, p[0], p[1]);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_circle_radius() {
        let pts = ellipse_points([0.0, 0.0], &DenseCov::from_diag(&[1.0, 1.0]), 0.9, 64).unwrap();
        for p in pts {
            assert_relative_eq!(p[0].hypot(p[1]), 4.605170185988091f64.sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn axis_ratio() {
        let pts = ellipse_points([1.0, -1.0], &DenseCov::from_diag(&[4.0, 1.0]), 0.9, 4).unwrap();
        let a = (pts[0][0] - 1.0).abs();
        let b = (pts[1][1] + 1.0).abs();
        assert_relative_eq!(a / b, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = DenseCov::new(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(ellipse_points([0.0, 0.0], &c, 0.9, 8).is_err());
        assert!(ellipse_points([0.0, 0.0], &DenseCov::from_diag(&[1.0, 1.0]), 1.0, 8).is_err());
    }
}
