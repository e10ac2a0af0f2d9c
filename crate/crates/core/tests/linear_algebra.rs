mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use varfilt_core::covariance::{
    kf_update, min_eig_diag_plus_rank1, sandwich_violation, Covariance, DenseCov, DiagCov, DiagPlusLowRank, RankOne,
};
use varfilt_core::Error;

#[test]
fn solve_matches_dense_lu() {
    let mut rng = rng(11);
    for _ in 0..200 {
        let n = rng.random_range(1..=64);
        let rank = rng.random_range(0..=2);
        let p = random_lowrank(&mut rng, n, rank);
        let b = normal_vec(&mut rng, n);
        let ours = p.solve(&b).unwrap();
        let oracle = lowrank_to_na(&p).lu().solve(&DVector::from_column_slice(&b)).unwrap();
        assert!(max_rel_err(&ours, oracle.as_slice()) < 1e-10);
    }
}

#[test]
fn logdet_matches_dense_cholesky() {
    let mut rng = rng(12);
    for _ in 0..200 {
        let n = rng.random_range(1..=64);
        let rank = rng.random_range(0..=2);
        let p = random_lowrank(&mut rng, n, rank);
        let chol = lowrank_to_na(&p).cholesky().unwrap();
        let oracle: f64 = 2.0 * chol.l().diagonal().map(f64::ln).sum();
        let ours = p.logdet().unwrap();
        assert!((ours - oracle).abs() <= 1e-9 * oracle.abs().max(1.0), "{ours} vs {oracle}");
    }
}

#[test]
fn quad_form_and_matvec_match_dense() {
    let mut rng = rng(13);
    for _ in 0..100 {
        let n = rng.random_range(1..=64);
        let p = random_lowrank(&mut rng, n, 2);
        let v = normal_vec(&mut rng, n);
        let a = lowrank_to_na(&p);
        let vv = DVector::from_column_slice(&v);
        assert!(rel_err(p.quad_form(&v), vv.dot(&(&a * &vv))) < 1e-12);
        assert!(max_rel_err(&p.matvec(&v), (&a * &vv).as_slice()) < 1e-12);
    }
}

#[test]
fn factored_inverse_is_an_inverse() {
    let mut rng = rng(14);
    for _ in 0..50 {
        let n = rng.random_range(1..=20);
        let p = random_lowrank(&mut rng, n, 2);
        let inv = lowrank_to_na(&p.factor().unwrap().inverse);
        let prod = inv * lowrank_to_na(&p);
        assert!((prod - DMatrix::identity(n, n)).amax() < 1e-10);
    }
}

#[test]
fn kf_update_matches_dense_formula() {
    let mut rng = rng(15);
    for _ in 0..200 {
        let n = rng.random_range(1..=64);
        let x = normal_vec(&mut rng, n);
        let r = rng.random_range(0.01..1.0);
        let prior: Covariance<f64> = match rng.random_range(0..3) {
            0 => random_diag(&mut rng, n).into(),
            1 => random_lowrank(&mut rng, n, 1).into(),
            _ => from_na(&random_spd(&mut rng, n)).into(),
        };
        let (post, gain) = dense_kalman(&to_na(&prior), &x, r);
        let up = kf_update(&prior, &x, r).unwrap();
        assert!(max_rel_err(&up.gain, &gain) < 1e-12);
        assert!(max_rel_err(up.posterior.to_dense().as_slice(), post.transpose().as_slice()) < 1e-9);
        assert!(up.posterior.min_eig().unwrap() > 0.0);
    }
}

#[test]
fn kf_update_from_diag_is_exact_to_1e12() {
    let mut rng = rng(16);
    for _ in 0..200 {
        let n = rng.random_range(1..=64);
        let prior: Covariance<f64> = random_diag(&mut rng, n).into();
        let x = normal_vec(&mut rng, n);
        let (post, _) = dense_kalman(&to_na(&prior), &x, 0.1);
        let up = kf_update(&prior, &x, 0.1).unwrap();
        assert!(max_rel_err(up.posterior.to_dense().as_slice(), post.transpose().as_slice()) < 1e-12);
    }
}

#[test]
fn kf_update_rank_budget() {
    let mut rng = rng(17);
    let p: Covariance<f64> = random_lowrank(&mut rng, 5, 2).into();
    let x = normal_vec(&mut rng, 5);
    assert!(matches!(kf_update(&p, &x, 0.1), Err(Error::Capacity { .. })));
}

#[test]
fn min_eig_matches_dense_eigensolver() {
    let mut rng = rng(18);
    for _ in 0..200 {
        let n = rng.random_range(1..=64);
        let rank = rng.random_range(0..=2);
        let p = random_lowrank(&mut rng, n, rank);
        let oracle = min_eig_dense(&lowrank_to_na(&p));
        let ours = Covariance::LowRank(p).min_eig().unwrap();
        assert!(rel_err(ours, oracle) < 1e-9, "{ours} vs {oracle}");
    }
}

#[test]
fn secular_solver_any_sign() {
    let mut rng = rng(19);
    for _ in 0..200 {
        let n = rng.random_range(1..=40);
        let d = normal_vec(&mut rng, n);
        let u = normal_vec(&mut rng, n);
        let c = rng.random_range(-3.0..3.0);
        let uv = DVector::from_column_slice(&u);
        let dense = diag_to_na(&d) + &uv * uv.transpose() * c;
        let oracle = min_eig_dense(&dense);
        let ours = min_eig_diag_plus_rank1(&d, c, &u).unwrap();
        assert!((ours - oracle).abs() <= 1e-9 * oracle.abs().max(1.0), "{ours} vs {oracle}");
    }
}

#[test]
fn secular_solver_repeated_and_zero_components() {
    // repeated poles and decoupled coordinates
    let d = [1.0, 1.0, 0.5, 2.0];
    let u = [1.0, -1.0, 0.0, 0.3];
    for c in [-2.0, -0.1, 0.7, 5.0] {
        let uv = DVector::from_column_slice(&u);
        let dense = diag_to_na(&d) + &uv * uv.transpose() * c;
        let ours = min_eig_diag_plus_rank1(&d, c, &u).unwrap();
        assert!((ours - min_eig_dense(&dense)).abs() < 1e-12);
    }
}

#[test]
fn sandwich_matches_dense_eigen() {
    let mut rng = rng(20);
    for _ in 0..100 {
        let n = rng.random_range(2..=16);
        let prev = random_diag(&mut rng, n);
        let x = normal_vec(&mut rng, n);
        let cand: Vec<f64> = prev.values().iter().map(|&p| p * rng.random_range(0.5..1.0)).collect();
        let (post, _) = dense_kalman(&diag_to_na(prev.values()), &x, 0.1);
        let oracle = min_eig_dense(&(diag_to_na(&cand) - post));
        let ours = sandwich_violation(&prev, &x, 0.1, &DiagCov::new(cand).unwrap()).unwrap();
        assert!((ours - oracle).abs() <= 1e-9 * oracle.abs().max(1e-3));
    }
}

#[test]
fn sandwich_upper_end_is_feasible() {
    let mut rng = rng(21);
    for _ in 0..50 {
        let n = rng.random_range(2..=16);
        let prev = random_diag(&mut rng, n);
        let x = normal_vec(&mut rng, n);
        assert!(sandwich_violation(&prev, &x, 0.1, &prev).unwrap() >= -1e-12);
    }
}

#[test]
fn dense_cov_rejects_asymmetry_and_indefinite() {
    assert!(DenseCov::new(2, vec![1.0, 0.5, 0.4, 1.0]).is_err());
    let indefinite = DenseCov::new(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
    assert!(indefinite.cholesky().is_err());
    assert!(Covariance::Dense(indefinite).solve(&[1.0, 0.0]).is_err());
}

#[test]
fn lowrank_rejects_non_spd_on_solve() {
    // I − 2 e₁e₁ᵀ is indefinite
    let p = DiagPlusLowRank::new(vec![1.0, 1.0], vec![RankOne { weight: -2.0, u: vec![1.0, 0.0] }]).unwrap();
    assert!(matches!(p.solve(&[1.0, 1.0]), Err(Error::Singular(_))));
    assert!(p.logdet().is_err());
}

#[test]
fn f32_instances_agree_with_f64() {
    let d = vec![1.0f32, 2.0, 0.5];
    let p = DiagPlusLowRank::new(d, vec![RankOne { weight: 0.7f32, u: vec![0.3, -1.0, 0.2] }]).unwrap();
    let p64 =
        DiagPlusLowRank::new(vec![1.0, 2.0, 0.5], vec![RankOne { weight: 0.7, u: vec![0.3, -1.0, 0.2] }]).unwrap();
    let a = p.solve(&[1.0, 1.0, 1.0]).unwrap();
    let b = p64.solve(&[1.0, 1.0, 1.0]).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((*x as f64 - y).abs() < 1e-5);
    }
}

fn lowrank_strategy() -> impl Strategy<Value = (DiagPlusLowRank<f64>, Vec<f64>)> {
    (1usize..24, any::<u64>(), 0usize..=2).prop_map(|(n, seed, rank)| {
        let mut r = rng(seed);
        let p = random_lowrank(&mut r, n, rank);
        let b = normal_vec(&mut r, n);
        (p, b)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solve_then_multiply_round_trips((p, b) in lowrank_strategy()) {
        let x = p.solve(&b).unwrap();
        let back = p.matvec(&x);
        prop_assert!(max_rel_err(&back, &b) < 1e-9);
    }

    #[test]
    fn kalman_posterior_sits_below_prior((p, x) in lowrank_strategy(), r in 0.01f64..2.0) {
        prop_assume!(p.rank() < 2);
        let prior = Covariance::LowRank(p.clone());
        let up = kf_update(&prior, &x, r).unwrap();
        let gap = lowrank_to_na(&p) - to_na(&up.posterior);
        prop_assert!(min_eig_dense(&gap) >= -1e-10);
        prop_assert!(up.posterior.min_eig().unwrap() > 0.0);
        prop_assert!(up.innovation_var >= r);
    }

    #[test]
    fn logdet_is_additive_under_scaling((p, _b) in lowrank_strategy(), s in 0.1f64..10.0) {
        let n = p.dim() as f64;
        let scaled = DiagPlusLowRank::new(
            p.base().iter().map(|v| v * s).collect(),
            p.terms().iter().map(|t| RankOne { weight: t.weight * s, u: t.u.clone() }).collect(),
        ).unwrap();
        let lhs = scaled.logdet().unwrap();
        let rhs = p.logdet().unwrap() + n * s.ln();
        prop_assert!((lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn push_term_respects_budget(n in 1usize..8, extra in 0usize..4) {
        let mut p = DiagPlusLowRank::from_diag(DiagCov::isotropic(n, 1.0).unwrap());
        for k in 0..extra {
            let res = p.push_term(0.5, vec![1.0; n]);
            prop_assert_eq!(res.is_ok(), k < 2);
        }
        prop_assert!(p.rank() <= 2);
    }
}
