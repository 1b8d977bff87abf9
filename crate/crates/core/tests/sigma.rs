mod common;

use common::{cplx, rng};
use proptest::prelude::*;
use pseudospec::dense::{jacobi_svd, singular_values, DenseMatrix};
use pseudospec::qh::{qh_factorize, TriangularFactor};
use pseudospec::sigma::*;
use pseudospec::{Complex64, Error};
use rand::Rng;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Banded upper triangular `B D` with a well conditioned `B` and column scales `D`.
fn scaled_factor(r: &mut impl Rng, n: usize, w: usize, scales: &[f64]) -> TriangularFactor {
    let mut f = TriangularFactor::zeros(n, w);
    for i in 0..n {
        for j in i..(i + w + 1).min(n) {
            let z = if i == j { cplx(r) * 0.3 + 2.0 } else { cplx(r) * 0.4 };
            f.set(i, j, z * scales[j]);
        }
    }
    f
}

fn dense_sigma_min(f: &TriangularFactor) -> f64 {
    *singular_values(&f.to_dense()).last().unwrap()
}

#[test]
fn diagonal_factors() {
    let id = TriangularFactor::from_dense(&DenseMatrix::identity(6), 0);
    assert!((smallest_singular_value(&id, 1e-10, 0, 1).sigma - 1.0).abs() < 1e-14);
    let mut d = TriangularFactor::zeros(3, 0);
    for (i, v) in [3.0, 2.0, 0.5].into_iter().enumerate() {
        d.set(i, i, c(v));
    }
    let res = smallest_singular_value(&d, 1e-10, 0, 1);
    assert!((res.sigma - 0.5).abs() < 1e-14);
    assert!(res.converged && res.residual <= 1e-10);
}

#[test]
fn substitution_solves() {
    let mut r = rng(5);
    let f = scaled_factor(&mut r, 40, 4, &[1.0; 40]);
    let x: Vec<Complex64> = (0..40).map(|_| cplx(&mut r)).collect();
    let dense = f.to_dense();
    let mul = |m: &DenseMatrix, v: &[Complex64]| -> Vec<Complex64> {
        (0..m.rows()).map(|i| m.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    };
    let err = |a: &[Complex64], b: &[Complex64]| {
        a.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max) / b.iter().map(|z| z.norm()).fold(0.0, f64::max)
    };
    let got = back_substitute(&f, &mul(&dense, &x)).unwrap();
    assert!(err(&got, &x) < 1e-12);
    let got = forward_substitute_adjoint(&f, &mul(&dense.adjoint(), &x)).unwrap();
    assert!(err(&got, &x) < 1e-12);

    let twos = TriangularFactor::from_dense(&DenseMatrix::from_fn(3, 3, |i, j| if i == j { c(2.0) } else { c(0.0) }), 0);
    assert_eq!(back_substitute(&twos, &[c(1.0); 3]).unwrap(), vec![c(0.5); 3]);
}

#[test]
fn singular_factor_reports_floor() {
    let mut f = scaled_factor(&mut rng(2), 8, 2, &[1.0; 8]);
    f.set(5, 5, c(0.0));
    assert!(matches!(back_substitute(&f, &[c(1.0); 8]), Err(Error::NearSingular { index: 5, .. })));
    let res = smallest_singular_value(&f, 1e-8, 0, 1);
    assert_eq!(res.sigma, 0.0);
    assert!(!res.converged);
}

#[test]
fn dense_oracle_examples() {
    let m = DenseMatrix::from_fn(2, 2, |i, j| if i == j { c(3.0 + i as f64) } else { c(0.0) });
    assert_eq!(singular_values(&m), vec![4.0, 3.0]);
    let col = DenseMatrix::from_fn(2, 1, |i, _| c(3.0 + i as f64));
    assert!((singular_values(&col)[0] - 5.0).abs() < 1e-15);

    let mut r = rng(9);
    let m = DenseMatrix::from_fn(20, 12, |_, _| cplx(&mut r));
    let svd = jacobi_svd(&m);
    let us = DenseMatrix::from_fn(20, 12, |i, j| svd.u[(i, j)] * svd.sigma[j]);
    let back = us.matmul(&svd.v.adjoint());
    assert!(back.sub(&m).max_abs() < 1e-12);
    assert!(svd.sigma.windows(2).all(|p| p[0] >= p[1]));
}

#[test]
fn pipeline_matches_dense_window() {
    let mut r = rng(21);
    let op = common::random_operator(&mut r, 3);
    for k in [-20i64, -3, 0, 4, 17] {
        let lambda = cplx(&mut r);
        let w = op.window(lambda, k, 30);
        let got = smallest_singular_value(&qh_factorize(&w).complete_qr(), 1e-12, 0, 4).sigma;
        let want = *singular_values(&w.to_dense()).last().unwrap();
        assert!((got - want).abs() <= 1e-10 * want, "{got} vs {want}");
    }
}

#[test]
fn large_factors_use_the_local_recurrence() {
    // above the full reorthogonalization limit
    let n = FULL_REORTH_MAX_N + 100;
    let mut r = rng(17);
    let f = scaled_factor(&mut r, n, 3, &vec![1.0; n]);
    let want = dense_sigma_min(&f);
    let res = smallest_singular_value(&f, 1e-10, 0, 1);
    assert!(res.sigma >= want * (1.0 - 1e-10), "{} below {want}", res.sigma);
    assert!(res.sigma <= want * (1.0 + 1e-4), "{} vs {want}", res.sigma);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gklb_matches_dense_svd(seed in any::<u64>(), n in 2usize..60, w in 0usize..6, tiny in prop::option::of(-10i32..-2)) {
        let mut r = rng(seed);
        let mut scales = vec![1.0; n];
        if let Some(e) = tiny {
            scales[r.gen_range(0..n)] = 10f64.powi(e);
        }
        let f = scaled_factor(&mut r, n, w, &scales);
        let want = dense_sigma_min(&f);
        let res = smallest_singular_value(&f, 1e-10, 0, seed);
        prop_assert!(res.sigma >= 0.0);
        prop_assert!((res.sigma - want).abs() <= 1e-8 * want, "{} vs {}", res.sigma, want);
        prop_assert!(!res.converged || res.residual <= 1e-5, "residual {}", res.residual);
    }

    #[test]
    fn unit_scalar_invariance(seed in any::<u64>(), theta in 0.0..std::f64::consts::TAU) {
        let mut r = rng(seed);
        let f = scaled_factor(&mut r, 30, 3, &[1.0; 30]);
        let mut g = f.clone();
        g.scale(Complex64::from_polar(1.0, theta));
        let a = smallest_singular_value(&f, 1e-10, 0, 3).sigma;
        let b = smallest_singular_value(&g, 1e-10, 0, 3).sigma;
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }
}
