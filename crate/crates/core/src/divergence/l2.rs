//! 𝕃² information pseudometric between a Gaussian and a diagonal Gaussian with
//! the same mean, and the diagonal that minimizes it.
//!
//! With `M = diag(d)⁻¹ Σp` the squared pseudometric is
//!
//! ```text
//! E_p[(log p/q)²] = n/2 − tr M + tr M²/2 + ¼ (tr M − log|M| − n)²
//!                 = ½ ‖W^½ Σp W^½ − I‖²_F + ¼ κ²,     W = diag(d)⁻¹
//! ```
//!
//! where `κ = tr M − log|M| − n` is twice the forward KL divergence. The second
//! form is what gets evaluated: both pieces are sums of small non-negative
//! terms near the optimum, which avoids cancelling `O(n)` quantities.
//! For `Σp = D₀ + Σₖ cₖuₖuₖᵀ` every term expands into per-coordinate sums and
//! `K × K` Gram entries `Gₖₗ = Σᵢ wᵢ uₖᵢ uₗᵢ`, so value and gradient are `O(nK²)`.

use crate::covariance::{Covariance, DenseCov, DiagCov, RankOne};
use crate::error::{check_dim, Error, Result};
use crate::vector::{dot, max_abs};
use crate::Scalar;

/// Trace quantities of `M = diag(d)⁻¹ Σp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Workspace<T> {
    pub trace_m: T,
    pub trace_m2: T,
    pub logdet_m: T,
    /// `tr (M − I)²`
    pub deviation_sq: T,
    /// `tr M − log|M| − n`
    pub kl_gap: T,
}

impl<T: Scalar> L2Workspace<T> {
    pub fn objective(&self) -> T {
        (T::lit(0.5) * self.deviation_sq + T::lit(0.25) * self.kl_gap * self.kl_gap).max(T::zero())
    }
}

#[derive(Debug, Clone)]
enum Repr<T> {
    Structured {
        base: Vec<T>,
        terms: Vec<RankOne<T>>,
        /// `log|Σp| − Σ log D₀ᵢ`
        lemma_logdet: T,
    },
    Dense(DenseCov<T>),
}

/// `Σp` with everything that does not depend on `d` precomputed.
#[derive(Debug, Clone)]
pub struct L2Problem<T> {
    n: usize,
    sigma_diag: Vec<T>,
    logdet_sigma: T,
    repr: Repr<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct L2Options<T> {
    /// Stop when the ∞-norm of the gradient in `log d` drops below this.
    /// Defaults to `1e-8 · n`.
    pub tol: Option<T>,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: T,
    pub shrink: T,
}

impl<T: Scalar> Default for L2Options<T> {
    fn default() -> Self {
        Self { tol: None, max_iter: 500, armijo: T::lit(1e-4), shrink: T::lit(0.5) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct L2Projection<T> {
    pub d: DiagCov<T>,
    pub objective: T,
    pub initial_objective: T,
    pub iterations: usize,
    pub converged: bool,
    /// ∞-norm of the log-space gradient at the returned point.
    pub grad_norm: T,
}

impl<T: Scalar> L2Problem<T> {
    pub fn new(sigma: &Covariance<T>) -> Result<Self> {
        let n = sigma.dim();
        let sigma_diag = sigma.diag();
        let (logdet_sigma, repr) = match sigma {
            Covariance::Diag(p) => {
                let ld = p.logdet();
                (ld, Repr::Structured { base: p.values().to_vec(), terms: Vec::new(), lemma_logdet: T::zero() })
            }
            Covariance::LowRank(p) => {
                let ld = p.factor()?.logdet;
                let base_ld: T = p.base().iter().map(|v| v.ln()).sum();
                (
                    ld,
                    Repr::Structured { base: p.base().to_vec(), terms: p.terms().to_vec(), lemma_logdet: ld - base_ld },
                )
            }
            Covariance::Dense(p) => (p.logdet()?, Repr::Dense(p.clone())),
        };
        Ok(Self { n, sigma_diag, logdet_sigma, repr })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn check_d(&self, d: &[T]) -> Result<()> {
        check_dim(self.n, d.len())?;
        if let Some(i) = d.iter().position(|&v| !(v > T::zero() && v.is_finite())) {
            return Err(Error::InvalidArgument(format!("variance {i} must be positive, got {}", d[i])));
        }
        Ok(())
    }

    fn gram(terms: &[RankOne<T>], w: &[T]) -> [[T; 2]; 2] {
        let mut g = [[T::zero(); 2]; 2];
        for (k, tk) in terms.iter().enumerate() {
            for (l, tl) in terms.iter().enumerate().skip(k) {
                let v: T = w.iter().zip(&tk.u).zip(&tl.u).map(|((&wi, &a), &b)| wi * a * b).sum();
                g[k][l] = v;
                g[l][k] = v;
            }
        }
        g
    }

    pub fn workspace(&self, d: &[T]) -> Result<L2Workspace<T>> {
        self.check_d(d)?;
        let n = T::from_usize(self.n).unwrap();
        let w: Vec<T> = d.iter().map(|v| v.recip()).collect();
        let trace_m: T = w.iter().zip(&self.sigma_diag).map(|(&wi, &s)| wi * s).sum();
        let sum_log_w: T = w.iter().map(|v| v.ln()).sum();
        let logdet_m = self.logdet_sigma + sum_log_w;
        let (deviation_sq, kl_gap) = match &self.repr {
            Repr::Structured { base, terms, lemma_logdet } => {
                let mut dev = T::zero();
                let mut gap = -*lemma_logdet;
                for (i, (&wi, &b)) in w.iter().zip(base).enumerate() {
                    let e = wi * b - T::one();
                    dev += e * e;
                    gap += e - e.ln_1p();
                    for t in terms {
                        let wu2 = wi * t.u[i] * t.u[i];
                        gap += t.weight * wu2;
                        dev += T::lit(2.0) * t.weight * e * wu2;
                    }
                }
                let g = Self::gram(terms, &w);
                for (k, tk) in terms.iter().enumerate() {
                    for (l, tl) in terms.iter().enumerate() {
                        dev += tk.weight * tl.weight * g[k][l] * g[k][l];
                    }
                }
                (dev, gap)
            }
            Repr::Dense(s) => {
                let mut dev = T::zero();
                for i in 0..self.n {
                    let si = w[i].sqrt();
                    for j in 0..self.n {
                        let mut e = si * s.get(i, j) * w[j].sqrt();
                        if i == j {
                            e -= T::one();
                        }
                        dev += e * e;
                    }
                }
                (dev, trace_m - logdet_m - n)
            }
        };
        let trace_m2 = deviation_sq + T::lit(2.0) * trace_m - n;
        Ok(L2Workspace { trace_m, trace_m2, logdet_m, deviation_sq, kl_gap })
    }

    pub fn value(&self, d: &[T]) -> Result<T> {
        Ok(self.workspace(d)?.objective())
    }

    /// `∂f/∂wᵢ` with `wᵢ = 1/dᵢ`:
    /// `(Σp W Σp)ᵢᵢ − Σpᵢᵢ + ½ κ (Σpᵢᵢ − dᵢ)`.
    fn grad_w(&self, d: &[T], ws: &L2Workspace<T>) -> Vec<T> {
        let w: Vec<T> = d.iter().map(|v| v.recip()).collect();
        let half_gap = T::lit(0.5) * ws.kl_gap;
        let mut out = Vec::with_capacity(self.n);
        match &self.repr {
            Repr::Structured { base, terms, .. } => {
                let g = Self::gram(terms, &w);
                for i in 0..self.n {
                    let e = w[i] * base[i] - T::one();
                    // (SWS)ᵢᵢ − Sᵢᵢ
                    let mut h = base[i] * e;
                    for (k, tk) in terms.iter().enumerate() {
                        h += tk.weight * tk.u[i] * tk.u[i] * (T::one() + T::lit(2.0) * e);
                        for (l, tl) in terms.iter().enumerate() {
                            h += tk.weight * tl.weight * tk.u[i] * tl.u[i] * g[k][l];
                        }
                    }
                    out.push(h + half_gap * (self.sigma_diag[i] - d[i]));
                }
            }
            Repr::Dense(s) => {
                for i in 0..self.n {
                    let sws: T = (0..self.n).map(|j| s.get(i, j) * s.get(i, j) * w[j]).sum();
                    out.push(sws - self.sigma_diag[i] + half_gap * (self.sigma_diag[i] - d[i]));
                }
            }
        }
        out
    }

    /// Gradient with respect to `d`.
    pub fn gradient(&self, d: &[T]) -> Result<Vec<T>> {
        let ws = self.workspace(d)?;
        Ok(self.grad_w(d, &ws).into_iter().zip(d).map(|(g, &di)| -g / (di * di)).collect())
    }

    /// Gradient with respect to `log d`.
    fn log_gradient(&self, d: &[T], ws: &L2Workspace<T>) -> Vec<T> {
        self.grad_w(d, ws).into_iter().zip(d).map(|(g, &di)| -g / di).collect()
    }

    /// Gradient descent on `z = log d` with Armijo backtracking. Trial steps
    /// use the Barzilai–Borwein length from the previous iteration.
    pub fn project(&self, d0: Option<&DiagCov<T>>, opts: &L2Options<T>) -> Result<L2Projection<T>> {
        let start: Vec<T> = match d0 {
            Some(d) => {
                check_dim(self.n, d.dim())?;
                d.values().to_vec()
            }
            None => self.sigma_diag.clone(),
        };
        let tol = opts.tol.unwrap_or_else(|| T::lit(1e-8) * T::from_usize(self.n).unwrap());

        let mut d = start;
        let ws = self.workspace(&d)?;
        let mut f = ws.objective();
        let initial_objective = f;
        let mut g = self.log_gradient(&d, &ws);
        let mut z: Vec<T> = d.iter().map(|v| v.ln()).collect();
        let mut prev: Option<(Vec<T>, Vec<T>)> = None;
        let mut step = T::one();
        let mut iterations = 0;
        let mut converged = false;

        while iterations < opts.max_iter {
            let gnorm = max_abs(&g);
            if gnorm < tol {
                converged = true;
                break;
            }
            if let Some((z_old, g_old)) = &prev {
                let s: Vec<T> = z.iter().zip(z_old).map(|(&a, &b)| a - b).collect();
                let y: Vec<T> = g.iter().zip(g_old).map(|(&a, &b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > T::zero() {
                    step = (dot(&s, &s) / sy).max(T::lit(1e-12)).min(T::lit(1e12));
                } else {
                    step = (step * T::lit(2.0)).min(T::lit(1e12));
                }
            }
            let g2 = dot(&g, &g);
            let mut accepted = None;
            for _ in 0..80 {
                let z_new: Vec<T> = z.iter().zip(&g).map(|(&zi, &gi)| zi - step * gi).collect();
                let d_new: Vec<T> = z_new.iter().map(|v| v.exp()).collect();
                if let Ok(ws_new) = self.workspace(&d_new) {
                    let f_new = ws_new.objective();
                    if f_new.is_finite() && f_new <= f - opts.armijo * step * g2 {
                        accepted = Some((z_new, d_new, ws_new, f_new));
                        break;
                    }
                }
                step *= opts.shrink;
            }
            let Some((z_new, d_new, ws_new, f_new)) = accepted else {
                // no representable decrease left along the gradient
                break;
            };
            iterations += 1;
            let g_new = self.log_gradient(&d_new, &ws_new);
            prev = Some((std::mem::replace(&mut z, z_new), std::mem::replace(&mut g, g_new)));
            d = d_new;
            f = f_new;
        }
        let grad_norm = max_abs(&g);
        converged = converged || grad_norm < tol;
        Ok(L2Projection { d: DiagCov::new(d)?, objective: f, initial_objective, iterations, converged, grad_norm })
    }
}

pub fn l2_workspace<T: Scalar>(sigma_p: &Covariance<T>, d: &DiagCov<T>) -> Result<L2Workspace<T>> {
    L2Problem::new(sigma_p)?.workspace(d.values())
}

/// Squared 𝕃² pseudometric between `N(μ, Σp)` and `N(μ, diag(d))`.
pub fn l2_objective<T: Scalar>(sigma_p: &Covariance<T>, d: &DiagCov<T>) -> Result<T> {
    L2Problem::new(sigma_p)?.value(d.values())
}

/// Analytic gradient of [`l2_objective`] with respect to `d`.
pub fn l2_gradient<T: Scalar>(sigma_p: &Covariance<T>, d: &DiagCov<T>) -> Result<Vec<T>> {
    L2Problem::new(sigma_p)?.gradient(d.values())
}

/// Diagonal minimizing the squared 𝕃² pseudometric, started from `d0`
/// (forward-KL projection when `None`).
pub fn l2_project<T: Scalar>(
    sigma_p: &Covariance<T>,
    d0: Option<&DiagCov<T>>,
    opts: &L2Options<T>,
) -> Result<L2Projection<T>> {
    L2Problem::new(sigma_p)?.project(d0, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::DiagPlusLowRank;
    use approx::assert_relative_eq;

    fn scalar(v: f64) -> Covariance<f64> {
        DiagCov::new(vec![v]).unwrap().into()
    }

    #[test]
    fn exact_representation_is_zero() {
        let s: Covariance<f64> = DiagCov::new(vec![0.5, 2.0, 3.0]).unwrap().into();
        let d = DiagCov::new(vec![0.5, 2.0, 3.0]).unwrap();
        assert_eq!(l2_objective(&s, &d).unwrap(), 0.0);
        assert!(l2_gradient(&s, &d).unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn scalar_hand_value() {
        let d = DiagCov::new(vec![2.0]).unwrap();
        let expected = 0.5 - 0.5 + 0.125 + 0.25 * (0.5 - 0.5f64.ln() - 1.0).powi(2);
        assert_relative_eq!(expected, 0.13433, epsilon = 1e-5);
        assert_relative_eq!(l2_objective(&scalar(1.0), &d).unwrap(), expected, epsilon = 1e-15);
        let ws = l2_workspace(&scalar(1.0), &d).unwrap();
        assert_relative_eq!(ws.trace_m, 0.5);
        assert_relative_eq!(ws.trace_m2, 0.25, epsilon = 1e-15);
        assert_relative_eq!(ws.logdet_m, 0.5f64.ln());
    }

    #[test]
    fn scalar_gradient_matches_central_difference() {
        let h = 1e-5;
        let f = |x: f64| l2_objective(&scalar(1.0), &DiagCov::new(vec![x]).unwrap()).unwrap();
        let fd = (f(2.0 + h) - f(2.0 - h)) / (2.0 * h);
        let g = l2_gradient(&scalar(1.0), &DiagCov::new(vec![2.0]).unwrap()).unwrap()[0];
        assert_relative_eq!(g, fd, max_relative = 1e-6);
    }

    #[test]
    fn rejects_non_positive_d() {
        let err = L2Problem::new(&scalar(1.0)).unwrap().value(&[0.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn diagonal_projects_to_itself() {
        let s: Covariance<f64> = DiagCov::new(vec![0.5, 2.0]).unwrap().into();
        let p = l2_project(&s, None, &L2Options::default()).unwrap();
        assert_eq!(p.d.values(), &[0.5, 2.0]);
        assert_eq!(p.objective, 0.0);
        assert!(p.converged);
    }

    #[test]
    fn improves_on_forward_kl_start() {
        let s: Covariance<f64> =
            DiagPlusLowRank::new(vec![1.0, 1.0], vec![RankOne { weight: 1.0, u: vec![1.0, 1.0] }]).unwrap().into();
        let ep = DiagCov::new(vec![2.0, 2.0]).unwrap();
        let p = l2_project(&s, Some(&ep), &L2Options::default()).unwrap();
        assert!(p.objective <= l2_objective(&s, &ep).unwrap());
        assert!(p.converged, "{p:?}");
    }
}
