//! Brute-force dense references.
//!
//! Nothing here shares the low-rank bookkeeping of [`fast_eigh`](crate::fast_eigh):
//! matrices are assembled entry by entry and decomposed whole.

use crate::dense::{symmetric_eig, SymEig};
use crate::error::{Error, Result};
use crate::fast_eigh::{EigenFactor, LowRankFactor, WeightedData};
use crate::matrix::Matrix;

/// Largest dimension [`materialize`] accepts.
pub const DEFAULT_MAX_DIM: usize = 512;

/// An explicitly stored m×m symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetric(Matrix);

impl DenseSymmetric {
    pub fn new(a: Matrix) -> Result<Self> {
        let asym = a.asymmetry();
        if asym > 1e-12 * a.frobenius_norm().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self(a))
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }
}

/// Entrywise `αI + QBQᵀ + XXᵀ − YYᵀ`, for `m ≤` [`DEFAULT_MAX_DIM`].
pub fn materialize(factor: &LowRankFactor, data: &WeightedData) -> Result<DenseSymmetric> {
    materialize_bounded(factor, data, DEFAULT_MAX_DIM)
}

pub fn materialize_bounded(
    factor: &LowRankFactor,
    data: &WeightedData,
    max_dim: usize,
) -> Result<DenseSymmetric> {
    let m = factor.dim();
    if data.dim() != m {
        return Err(Error::Dimension(format!(
            "data has dimension {} but the factor has {m}",
            data.dim()
        )));
    }
    if m > max_dim {
        return Err(Error::TooLarge { m, bound: max_dim });
    }
    let (q, b, x, y) = (factor.q(), factor.b(), data.x(), data.y());
    let n = q.cols();
    let mut a = Matrix::zeros(m, m);
    for j in 0..m {
        for i in 0..=j {
            let mut v = if i == j { factor.alpha() } else { 0.0 };
            for p in 0..n {
                for r in 0..n {
                    v += q[(i, p)] * b[(p, r)] * q[(j, r)];
                }
            }
            for l in 0..x.cols() {
                v += x[(i, l)] * x[(j, l)];
            }
            for l in 0..y.cols() {
                v -= y[(i, l)] * y[(j, l)];
            }
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Ok(DenseSymmetric(a))
}

/// Entrywise `αI + E·diag(D)·Eᵀ`.
pub fn materialize_eigen(ef: &EigenFactor) -> Result<DenseSymmetric> {
    let m = ef.dim();
    if m > DEFAULT_MAX_DIM {
        return Err(Error::TooLarge {
            m,
            bound: DEFAULT_MAX_DIM,
        });
    }
    let e = ef.vectors();
    let mut a = Matrix::zeros(m, m);
    for j in 0..m {
        for i in 0..=j {
            let mut v = if i == j { ef.alpha() } else { 0.0 };
            for (l, &d) in ef.values().iter().enumerate() {
                v += e[(i, l)] * d * e[(j, l)];
            }
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Ok(DenseSymmetric(a))
}

/// All eigenpairs of `a`, eigenvalues descending.
pub fn dense_spectrum(a: &DenseSymmetric) -> Result<SymEig> {
    symmetric_eig(&a.0)
}

/// `xᵀA⁻¹x` through the full eigendecomposition of `A`.
pub fn mahalanobis_sq(a: &DenseSymmetric, x: &[f64]) -> Result<f64> {
    if x.len() != a.dim() {
        return Err(Error::Dimension(format!(
            "vector has length {} but the matrix has dimension {}",
            x.len(),
            a.dim()
        )));
    }
    let eig = dense_spectrum(a)?;
    let c = eig.vectors.t_matvec(x);
    let mut s = 0.0;
    for (ci, &l) in c.iter().zip(&eig.values) {
        if l <= 0.0 {
            return Err(Error::NonPositiveEigenvalue(l));
        }
        s += ci * ci / l;
    }
    Ok(s)
}

/// Squared log-deviation of every window `[τ, τ + len − k)` of the descending
/// `values`, for τ in `0..=k`. Uses a plain two-pass mean.
pub fn window_objectives(values: &[f64], k: usize) -> Result<Vec<f64>> {
    let total = values.len();
    if k > total {
        return Err(Error::InvalidRank { k, m: total });
    }
    if let Some(&v) = values.iter().find(|v| v.is_nan() || **v <= 0.0) {
        return Err(Error::NonPositiveEigenvalue(v));
    }
    let width = total - k;
    Ok((0..=k)
        .map(|tau| {
            if width == 0 {
                return 0.0;
            }
            let logs: Vec<f64> = values[tau..tau + width].iter().map(|v| v.ln()).collect();
            let mean = logs.iter().sum::<f64>() / width as f64;
            logs.iter().map(|l| (l - mean) * (l - mean)).sum()
        })
        .collect())
}

/// Smallest τ whose window objective is minimal, up to a relative slack
/// that absorbs rounding differences between summation orders.
pub fn brute_force_tau(values: &[f64], k: usize) -> Result<usize> {
    let obj = window_objectives(values, k)?;
    let best = obj.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = best * 1e-10 + 1e-24;
    Ok(obj
        .iter()
        .position(|&o| o <= best + slack)
        .expect("non-empty"))
}

/// Replaces the chosen window of the descending `values` by its geometric
/// mean. Returns `(τ, ᾱ, new descending values)`.
pub fn brute_force_truncation(values: &[f64], k: usize) -> Result<(usize, f64, Vec<f64>)> {
    let tau = brute_force_tau(values, k)?;
    let width = values.len() - k;
    let window = &values[tau..tau + width];
    let alpha = if width == 0 {
        1.0
    } else {
        (window.iter().map(|v| v.ln()).sum::<f64>() / width as f64).exp()
    };
    let mut out = values.to_vec();
    out[tau..tau + width].iter_mut().for_each(|v| *v = alpha);
    Ok((tau, alpha, out))
}

/// Dense reference for the streaming metric learner: keeps the whole m×m
/// matrix and decomposes it in full at every step.
#[derive(Debug, Clone)]
pub struct DenseLearner {
    a: Matrix,
    alpha: f64,
}

impl DenseLearner {
    pub fn scaled_identity(m: usize, alpha: f64) -> Result<Self> {
        if m > DEFAULT_MAX_DIM {
            return Err(Error::TooLarge {
                m,
                bound: DEFAULT_MAX_DIM,
            });
        }
        Ok(Self {
            a: Matrix::identity(m).scaled(alpha),
            alpha,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    /// Coefficient of the identity tracked alongside the matrix; it only
    /// sets the default floor.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Decay, signed outer-product update, eigenvalue floor, windowed
    /// truncation to `rank_cap` distinct eigenpairs. Returns the chosen τ.
    pub fn update(
        &mut self,
        vectors: &[Vec<f64>],
        weights: &[f64],
        decay: f64,
        gain: f64,
        rank_cap: usize,
        floor: Option<f64>,
    ) -> Result<usize> {
        let m = self.a.rows();
        if vectors.len() != weights.len() || vectors.iter().any(|v| v.len() != m) {
            return Err(Error::Dimension("batch does not match the model".into()));
        }
        let floor = floor.unwrap_or(1e-12 * self.alpha);
        let mut next = Matrix::zeros(m, m);
        for j in 0..m {
            for i in 0..m {
                let mut v = decay * self.a[(i, j)];
                for (x, &w) in vectors.iter().zip(weights) {
                    v += gain * w * x[i] * x[j];
                }
                next.col_mut(j)[i] = v;
            }
        }
        let eig = symmetric_eig(&next.symmetrized())?;
        let floored: Vec<f64> = eig.values.iter().map(|&l| l.max(floor)).collect();
        // Flooring is monotone, so the order is still descending.
        let (tau, alpha, values) = brute_force_truncation(&floored, rank_cap)?;
        self.alpha = alpha;
        self.a = eig
            .vectors
            .matmul(&Matrix::from_diag(&values))
            .matmul_t(&eig.vectors)
            .symmetrized();
        Ok(tau)
    }

    /// All m eigenvalues, descending.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(symmetric_eig(&self.a)?.values)
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        mahalanobis_sq(&DenseSymmetric::new(self.a.clone())?, x)
    }
}
