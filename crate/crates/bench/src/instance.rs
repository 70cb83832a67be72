//! Seeded random test matrices.

use feigh::{thin_svd, LowRankFactor, Matrix, WeightedData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A random `(α, αI + QBQᵀ, XXᵀ − YYᵀ)` problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub factor: LowRankFactor,
    pub data: WeightedData,
}

impl Instance {
    pub fn alpha(&self) -> f64 {
        self.factor.alpha()
    }
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    Matrix::from_col_major(rows, cols, data).expect("sizes agree")
}

/// m×n matrix with orthonormal columns spanning a Gaussian subspace.
pub fn random_orthonormal(rng: &mut impl Rng, m: usize, n: usize) -> feigh::Result<Matrix> {
    Ok(thin_svd(&gaussian_matrix(rng, m, n))?.u)
}

/// Symmetric `(G + Gᵀ)/2` with Gaussian `G`.
pub fn random_symmetric(rng: &mut impl Rng, n: usize) -> Matrix {
    gaussian_matrix(rng, n, n).symmetrized()
}

/// Deterministic instance with `alpha = 1`; requires `n + nx + ny ≤ m`.
pub fn generate_instance(
    seed: u64,
    m: usize,
    n: usize,
    nx: usize,
    ny: usize,
) -> feigh::Result<Instance> {
    if n + nx + ny > m {
        return Err(feigh::Error::RankExceedsDimension {
            rank: n + nx + ny,
            dim: m,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_orthonormal(&mut rng, m, n)?;
    let b = random_symmetric(&mut rng, n);
    let x = gaussian_matrix(&mut rng, m, nx);
    let y = gaussian_matrix(&mut rng, m, ny);
    Ok(Instance {
        factor: LowRankFactor::new(1.0, q, b)?,
        data: WeightedData::new(x, y)?,
    })
}
