#![allow(dead_code)]

use feigh::{thin_svd, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    Matrix::from_col_major(rows, cols, data).unwrap()
}

pub fn orthonormal(rng: &mut impl Rng, m: usize, n: usize) -> Matrix {
    thin_svd(&gaussian(rng, m, n)).unwrap().u
}

pub fn symmetric(rng: &mut impl Rng, n: usize) -> Matrix {
    gaussian(rng, n, n).symmetrized()
}

pub fn gram_defect(q: &Matrix) -> f64 {
    q.t_matmul(q)
        .sub(&Matrix::identity(q.cols()))
        .frobenius_norm()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn empty(m: usize) -> Matrix {
    Matrix::zeros(m, 0)
}
