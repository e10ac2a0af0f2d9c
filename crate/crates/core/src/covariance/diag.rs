use crate::error::{Error, Result};
use crate::Scalar;

/// Diagonal covariance `diag(d)` with strictly positive variances.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagCov<T> {
    d: Vec<T>,
}

impl<T: Scalar> DiagCov<T> {
    pub fn new(d: Vec<T>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::InvalidArgument("empty diagonal".into()));
        }
        if let Some(i) = d.iter().position(|&v| !(v > T::zero() && v.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "diagonal entry {i} must be positive and finite, got {}",
                d[i]
            )));
        }
        Ok(Self { d })
    }

    /// `scale * I` of dimension `n`.
    pub fn isotropic(n: usize, scale: T) -> Result<Self> {
        Self::new(vec![scale; n])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.d
    }

    pub fn into_values(self) -> Vec<T> {
        self.d
    }

    pub fn quad_form(&self, v: &[T]) -> T {
        self.d.iter().zip(v).map(|(&d, &x)| d * x * x).sum()
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        self.d.iter().zip(v).map(|(&d, &x)| d * x).collect()
    }

    pub fn logdet(&self) -> T {
        self.d.iter().map(|d| d.ln()).sum()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.d.iter().zip(b).map(|(&d, &x)| x / d).collect()
    }

    pub fn max(&self) -> T {
        self.d.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    pub fn min(&self) -> T {
        self.d.iter().fold(T::infinity(), |m, &v| m.min(v))
    }
}
