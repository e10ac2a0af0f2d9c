use crate::error::{check_dim, Error, Result};
use crate::Scalar;

/// Full symmetric `n × n` covariance, row-major.
///
/// Quadratic in memory. Used by the exact Kalman baseline and as the
/// reference implementation that structured routines are checked against.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseCov<T> {
    n: usize,
    a: Vec<T>,
}

impl<T: Scalar> DenseCov<T> {
    pub fn new(n: usize, a: Vec<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        check_dim(n * n, a.len())?;
        let tol = T::lit(1e-12);
        for i in 0..n {
            for j in (i + 1)..n {
                let (x, y) = (a[i * n + j], a[j * n + i]);
                let scale = x.abs().max(y.abs()).max(T::min_positive_value());
                if (x - y).abs() > tol * scale {
                    return Err(Error::InvalidArgument(format!("matrix not symmetric at ({i}, {j}): {x} vs {y}")));
                }
            }
        }
        Ok(Self { n, a })
    }

    pub fn from_diag(d: &[T]) -> Self {
        let n = d.len();
        let mut a = vec![T::zero(); n * n];
        for (i, &v) in d.iter().enumerate() {
            a[i * n + i] = v;
        }
        Self { n, a }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.a[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.a
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        self.a.chunks_exact(self.n).map(|row| row.iter().zip(v).map(|(&r, &x)| r * x).sum()).collect()
    }

    pub fn quad_form(&self, v: &[T]) -> T {
        self.matvec(v).iter().zip(v).map(|(&p, &x)| p * x).sum()
    }

    /// Lower Cholesky factor, row-major.
    pub fn cholesky(&self) -> Result<Vec<T>> {
        let n = self.n;
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut s = self.get(j, j);
            for k in 0..j {
                s -= l[j * n + k] * l[j * n + k];
            }
            if !(s > T::zero()) {
                return Err(Error::Singular(format!("Cholesky pivot {j} is {s:e}")));
            }
            let djj = s.sqrt();
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(l)
    }

    pub fn logdet(&self) -> Result<T> {
        let l = self.cholesky()?;
        Ok((0..self.n).map(|i| l[i * self.n + i].ln()).sum::<T>() * T::lit(2.0))
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        check_dim(self.n, b.len())?;
        let l = self.cholesky()?;
        Ok(chol_solve(&l, self.n, b))
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let l = self.cholesky()?;
        let mut inv = vec![T::zero(); n * n];
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            let col = chol_solve(&l, n, &e);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        // symmetrize away round-off
        for i in 0..n {
            for j in (i + 1)..n {
                let m = (inv[i * n + j] + inv[j * n + i]) * T::lit(0.5);
                inv[i * n + j] = m;
                inv[j * n + i] = m;
            }
        }
        Ok(Self { n, a: inv })
    }

    /// `self - w * u uᵀ`
    pub(crate) fn rank_one_update(&self, w: T, u: &[T]) -> Self {
        let n = self.n;
        let mut a = self.a.clone();
        for i in 0..n {
            let wi = w * u[i];
            for j in 0..n {
                a[i * n + j] += wi * u[j];
            }
        }
        Self { n, a }
    }
}

fn chol_solve<T: Scalar>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_asymmetric() {
        assert!(DenseCov::new(2, vec![1.0, 0.5, 0.4, 1.0]).is_err());
    }

    #[test]
    fn inverse_of_2x2() {
        let p = DenseCov::new(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let inv = p.inverse().unwrap();
        assert_relative_eq!(inv.get(0, 0), 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(inv.get(0, 1), -1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(p.logdet().unwrap(), 3f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn indefinite_is_singular() {
        let p = DenseCov::new(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(p.cholesky(), Err(Error::Singular(_))));
    }
}
