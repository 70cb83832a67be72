mod common;

use common::{gaussian, gram_defect, max_abs_diff, orthonormal, rng, symmetric};
use feigh::{orthonormal_residual, symmetric_eig, thin_svd, Matrix};
use proptest::prelude::*;

/// Determinant by cofactor expansion along the first row.
fn det(a: &Matrix) -> f64 {
    let n = a.rows();
    if n == 0 {
        return 1.0;
    }
    (0..n)
        .map(|j| {
            let rest: Vec<Vec<f64>> = (1..n)
                .map(|i| (0..n).filter(|&c| c != j).map(|c| a[(i, c)]).collect())
                .collect();
            let minor = if n == 1 {
                Matrix::zeros(0, 0)
            } else {
                Matrix::from_rows(&rest).unwrap()
            };
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * a[(0, j)] * det(&minor)
        })
        .sum()
}

#[test]
fn singular_values_match_gram_eigenvalues() {
    let a = gaussian(&mut rng(8), 8, 3);
    let svd = thin_svd(&a).unwrap();
    let gram = symmetric_eig(&a.t_matmul(&a)).unwrap();
    let from_gram: Vec<f64> = gram.values.iter().map(|l| l.max(0.0).sqrt()).collect();
    assert!(max_abs_diff(&svd.s, &from_gram) < 1e-12);
    assert!(svd.reconstruct().sub(&a).frobenius_norm() <= 1e-10 * a.frobenius_norm().max(1.0));
}

#[test]
fn six_by_six_trace_and_reconstruction() {
    let b = symmetric(&mut rng(6), 6);
    let eig = symmetric_eig(&b).unwrap();
    let trace: f64 = b.diag().iter().sum();
    assert!((trace - eig.values.iter().sum::<f64>()).abs() <= 1e-10 * trace.abs().max(1.0));
    assert!(eig.reconstruct().sub(&b).frobenius_norm() <= 1e-10 * b.frobenius_norm().max(1.0));
}

#[test]
fn eigenvalue_product_is_determinant() {
    for seed in 0..40 {
        let n = 1 + (seed as usize % 4);
        let b = symmetric(&mut rng(100 + seed), n);
        let eig = symmetric_eig(&b).unwrap();
        let d = det(&b);
        let p: f64 = eig.values.iter().product();
        assert!(
            (d - p).abs() <= 1e-10 * d.abs().max(1.0),
            "seed {seed}: {d} vs {p}"
        );
    }
}

#[test]
fn rank_deficient_svd_keeps_invariants() {
    let mut r = rng(3);
    let a = gaussian(&mut r, 10, 2).matmul(&gaussian(&mut r, 2, 5));
    let svd = thin_svd(&a).unwrap();
    assert!(gram_defect(&svd.u) <= 1e-12 * 5f64.sqrt());
    assert!(gram_defect(&svd.v) <= 1e-12 * 5f64.sqrt());
    assert!(svd.s[2..].iter().all(|&s| s < 1e-12 * svd.s[0]));
    assert!(svd.reconstruct().sub(&a).frobenius_norm() <= 1e-10 * a.frobenius_norm());
}

#[test]
fn asymmetric_input_rejected() {
    let mut b = Matrix::identity(3);
    b.col_mut(1)[0] = 1e-3;
    assert!(symmetric_eig(&b).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thin_svd_invariants(seed in any::<u64>(), m in 0usize..24, frac in 0.0f64..=1.0) {
        let k = (frac * m as f64) as usize;
        let a = gaussian(&mut rng(seed), m, k);
        let svd = thin_svd(&a).unwrap();
        let tol = 1e-12 * (k as f64).sqrt();
        prop_assert!(gram_defect(&svd.u) <= tol);
        prop_assert!(gram_defect(&svd.v) <= tol);
        prop_assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(svd.reconstruct().sub(&a).frobenius_norm() <= 1e-10 * a.frobenius_norm().max(1.0));
    }

    #[test]
    fn symmetric_eig_invariants(seed in any::<u64>(), n in 0usize..20) {
        let b = symmetric(&mut rng(seed), n);
        let eig = symmetric_eig(&b).unwrap();
        let scale = b.frobenius_norm().max(1.0);
        prop_assert!(gram_defect(&eig.vectors) <= 1e-12 * (n as f64).sqrt());
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(eig.reconstruct().sub(&b).frobenius_norm() <= 1e-10 * scale);
        let sq: f64 = eig.values.iter().map(|v| v * v).sum();
        prop_assert!((sq - b.frobenius_norm().powi(2)).abs() <= 1e-10 * scale * scale);
    }

    #[test]
    fn residual_split_and_deflation(seed in any::<u64>(), m in 1usize..30, n in 0usize..8, k in 0usize..6) {
        let n = n.min(m);
        let mut r = rng(seed);
        let q = orthonormal(&mut r, m, n);
        let x = gaussian(&mut r, m, k);
        let (p, res) = orthonormal_residual(&q, &x).unwrap();
        let scale = x.frobenius_norm().max(1.0);
        prop_assert!(q.matmul(&p).add(&res).sub(&x).frobenius_norm() <= 1e-12 * scale);
        prop_assert!(q.t_matmul(&res).frobenius_norm() <= 1e-10 * scale);
    }
}

#[test]
fn rank_one_square_converges() {
    let mut r = rng(77);
    for _ in 0..50 {
        let a = gaussian(&mut r, 3, 1).matmul(&gaussian(&mut r, 1, 3));
        let svd = thin_svd(&a).unwrap();
        assert!(gram_defect(&svd.u) <= 1e-12 * 3f64.sqrt());
        assert!(svd.reconstruct().sub(&a).frobenius_norm() <= 1e-10 * a.frobenius_norm());
    }
}
