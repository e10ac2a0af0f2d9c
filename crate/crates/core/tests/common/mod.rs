#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use varfilt_core::covariance::{Covariance, DenseCov, DiagCov, DiagPlusLowRank, RankOne};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn positive_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn to_na(c: &Covariance<f64>) -> DMatrix<f64> {
    let dense = c.to_dense();
    let n = dense.dim();
    DMatrix::from_row_slice(n, n, dense.as_slice())
}

pub fn lowrank_to_na(p: &DiagPlusLowRank<f64>) -> DMatrix<f64> {
    let n = p.dim();
    DMatrix::from_row_slice(n, n, &p.to_dense())
}

pub fn diag_to_na(d: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(d))
}

pub fn from_na(m: &DMatrix<f64>) -> DenseCov<f64> {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    DenseCov::new(n, sym.transpose().as_slice().to_vec()).unwrap()
}

/// SPD diagonal plus `rank` signed rank-one terms. Negative terms are scaled
/// to remove at most 95% of the variance along their direction.
pub fn random_lowrank(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> DiagPlusLowRank<f64> {
    let d = positive_vec(rng, n, 0.2, 3.0);
    let mut terms = Vec::new();
    let mut dense = diag_to_na(&d);
    for _ in 0..rank {
        let u = normal_vec(rng, n);
        let uv = DVector::from_column_slice(&u);
        let weight = if rng.random_bool(0.5) {
            rng.random_range(0.1..2.0)
        } else {
            let q = uv.dot(&dense.clone().cholesky().unwrap().solve(&uv));
            -rng.random_range(0.05..0.95) / q
        };
        dense += &uv * uv.transpose() * weight;
        terms.push(RankOne { weight, u });
    }
    DiagPlusLowRank::new(d, terms).unwrap()
}

/// Dense SPD matrix with a controlled spectrum.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    &a * a.transpose() / n as f64 + DMatrix::identity(n, n) * 0.3
}

pub fn random_diag(rng: &mut ChaCha8Rng, n: usize) -> DiagCov<f64> {
    DiagCov::new(positive_vec(rng, n, 0.2, 3.0)).unwrap()
}

pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn min_eig_dense(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

/// `P − P x xᵀ P / (xᵀ P x + R)` and `P x / (xᵀ P x + R)` evaluated densely.
pub fn dense_kalman(p: &DMatrix<f64>, x: &[f64], r: f64) -> (DMatrix<f64>, Vec<f64>) {
    let xv = DVector::from_column_slice(x);
    let px = p * &xv;
    let s = xv.dot(&px) + r;
    let post = p - &px * px.transpose() / s;
    let gain = (px / s).as_slice().to_vec();
    (post, gain)
}

/// `[diag(1/d) − γI + x xᵀ/R]⁻¹` evaluated densely.
pub fn dense_hinf(d: &[f64], x: &[f64], r: f64, gamma: f64) -> DMatrix<f64> {
    let n = d.len();
    let xv = DVector::from_column_slice(x);
    let prec = DMatrix::from_diagonal(&DVector::from_iterator(n, d.iter().map(|v| 1.0 / v)))
        - DMatrix::identity(n, n) * gamma
        + &xv * xv.transpose() / r;
    prec.try_inverse().unwrap()
}

/// Forward KL `D(p‖q)` for zero-mean Gaussians, dense.
pub fn dense_kl(p: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    let n = p.nrows() as f64;
    let qc = q.clone().cholesky().unwrap();
    let tr = (qc.solve(p)).trace();
    let ld = |m: &DMatrix<f64>| 2.0 * m.clone().cholesky().unwrap().l().diagonal().map(f64::ln).sum();
    0.5 * (tr + ld(q) - ld(p) - n)
}

/// `E_p[(log p/q)²]` for zero-mean Gaussians, dense.
pub fn dense_l2(p: &DMatrix<f64>, d: &[f64]) -> f64 {
    let n = p.nrows();
    let m = diag_to_na(&d.iter().map(|v| 1.0 / v).collect::<Vec<_>>()) * p;
    let logdet_m = m.determinant().ln();
    let kappa = m.trace() - logdet_m - n as f64;
    let dev = &m - DMatrix::identity(n, n);
    0.5 * (&dev * &dev).trace() + 0.25 * kappa * kappa
}

/// Minimizes a unimodal function on `[lo, hi]` by ternary search.
pub fn ternary_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    for _ in 0..iters {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}
