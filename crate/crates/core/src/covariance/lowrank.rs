use crate::covariance::DiagCov;
use crate::error::{check_dim, Error, Result};
use crate::vector::{axpy, dot};
use crate::Scalar;

/// Maximum number of rank-one terms carried by [`DiagPlusLowRank`].
///
/// One carried-over correction plus one Kalman downdate per step.
pub const MAX_TERMS: usize = 2;

/// A signed rank-one term `weight * u uᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOne<T> {
    pub weight: T,
    pub u: Vec<T>,
}

/// Covariance `diag(d) + Σₖ cₖ uₖuₖᵀ` with at most [`MAX_TERMS`] terms.
///
/// Weights may be negative (Kalman downdates). Positive definiteness of the
/// whole matrix is not checked on construction; [`factor`](Self::factor)
/// reports a singularity error if a prefix of the update chain loses it.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagPlusLowRank<T> {
    d: Vec<T>,
    terms: Vec<RankOne<T>>,
}

/// Inverse and log-determinant obtained by chaining Sherman–Morrison over the terms.
#[derive(Debug, Clone)]
pub struct Factored<T> {
    pub inverse: DiagPlusLowRank<T>,
    pub logdet: T,
}

impl<T: Scalar> DiagPlusLowRank<T> {
    pub fn new(d: Vec<T>, terms: Vec<RankOne<T>>) -> Result<Self> {
        let base = DiagCov::new(d)?;
        let mut out = Self::from_diag(base);
        for t in terms {
            out.push_term(t.weight, t.u)?;
        }
        Ok(out)
    }

    pub fn from_diag(d: DiagCov<T>) -> Self {
        Self { d: d.into_values(), terms: Vec::new() }
    }

    /// Builds from parts known to be valid (positive diagonal, matching lengths).
    pub(crate) fn from_parts_unchecked(d: Vec<T>, terms: Vec<RankOne<T>>) -> Self {
        debug_assert!(terms.len() <= MAX_TERMS);
        debug_assert!(terms.iter().all(|t| t.u.len() == d.len()));
        Self { d, terms }
    }

    /// Appends `weight * u uᵀ`. A zero weight or zero vector is dropped.
    pub fn push_term(&mut self, weight: T, u: Vec<T>) -> Result<()> {
        check_dim(self.dim(), u.len())?;
        if !weight.is_finite() || u.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite rank-one term".into()));
        }
        if weight == T::zero() || u.iter().all(|&v| v == T::zero()) {
            return Ok(());
        }
        if self.terms.len() >= MAX_TERMS {
            return Err(Error::Capacity { requested: self.terms.len() + 1, max: MAX_TERMS });
        }
        self.terms.push(RankOne { weight, u });
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    #[inline]
    pub fn base(&self) -> &[T] {
        &self.d
    }

    #[inline]
    pub fn terms(&self) -> &[RankOne<T>] {
        &self.terms
    }

    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    /// Diagonal of the represented matrix.
    pub fn diag(&self) -> Vec<T> {
        let mut out = self.d.clone();
        for t in &self.terms {
            for (o, &u) in out.iter_mut().zip(&t.u) {
                *o += t.weight * u * u;
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        let mut out: Vec<T> = self.d.iter().zip(v).map(|(&d, &x)| d * x).collect();
        for t in &self.terms {
            let s = t.weight * dot(&t.u, v);
            axpy(s, &t.u, &mut out);
        }
        out
    }

    pub fn quad_form(&self, v: &[T]) -> T {
        let mut acc: T = self.d.iter().zip(v).map(|(&d, &x)| d * x * x).sum();
        for t in &self.terms {
            let p = dot(&t.u, v);
            acc += t.weight * p * p;
        }
        acc
    }

    /// Inverts term by term: with `A₀ = D` and `Aₖ = Aₖ₋₁ + cₖuₖuₖᵀ`,
    /// `Aₖ⁻¹ = Aₖ₋₁⁻¹ − cₖ vₖvₖᵀ / (1 + cₖ uₖᵀvₖ)` where `vₖ = Aₖ₋₁⁻¹uₖ`.
    /// The determinant picks up the factor `1 + cₖ uₖᵀvₖ` at each stage, which
    /// must stay positive for every prefix to be positive definite.
    pub fn factor(&self) -> Result<Factored<T>> {
        let inv_d: Vec<T> = self.d.iter().map(|&d| d.recip()).collect();
        let mut logdet: T = self.d.iter().map(|d| d.ln()).sum();
        let mut inverse = Self::from_parts_unchecked(inv_d, Vec::with_capacity(self.terms.len()));
        for (k, t) in self.terms.iter().enumerate() {
            let v = inverse.matvec(&t.u);
            let denom = T::one() + t.weight * dot(&t.u, &v);
            if !(denom > T::zero()) || !denom.is_finite() {
                return Err(Error::Singular(format!("rank-one term {k} gives determinant-lemma factor {denom:e}")));
            }
            logdet += denom.ln();
            let alpha = -t.weight / denom;
            if alpha != T::zero() {
                inverse.terms.push(RankOne { weight: alpha, u: v });
            }
        }
        Ok(Factored { inverse, logdet })
    }

    /// `P⁻¹ b` in `O(n · rank)`.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim(), b.len())?;
        Ok(self.factor()?.inverse.matvec(b))
    }

    pub fn logdet(&self) -> Result<T> {
        Ok(self.factor()?.logdet)
    }

    /// Row-major dense expansion, `O(n²)`.
    pub fn to_dense(&self) -> Vec<T> {
        let n = self.dim();
        let mut m = vec![T::zero(); n * n];
        for i in 0..n {
            m[i * n + i] = self.d[i];
        }
        for t in &self.terms {
            for i in 0..n {
                let wi = t.weight * t.u[i];
                for j in 0..n {
                    m[i * n + j] += wi * t.u[j];
                }
            }
        }
        m
    }
}
