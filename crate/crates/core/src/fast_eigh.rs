//! Thin eigendecomposition of `αI + QBQᵀ + XXᵀ − YYᵀ` in `O(m(n + nx + ny)²)`.
//!
//! The pipeline absorbs the positive and then the negative update into an
//! enlarged orthonormal basis ([`augment`]), and diagonalizes the small
//! symmetric core ([`factor_to_eig`]).

use crate::dense::{self, orthonormal_residual, symmetric_eig, thin_svd};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Singular values at or below `RANK_TOL · max(σ_max, ‖X‖_F)` are dropped
/// during augmentation.
pub const RANK_TOL: f64 = 1e-12;

/// `αI + QBQᵀ` with `Q` orthonormal (m×n) and `B` symmetric (n×n).
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactor {
    alpha: f64,
    q: Matrix,
    b: Matrix,
}

impl LowRankFactor {
    pub fn new(alpha: f64, q: Matrix, b: Matrix) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "alpha must be finite and nonnegative, got {alpha}"
            )));
        }
        let (m, n) = q.shape();
        if b.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "B is {}x{} but Q has {n} columns",
                b.rows(),
                b.cols()
            )));
        }
        if n > m {
            return Err(Error::RankExceedsDimension { rank: n, dim: m });
        }
        if !q.is_finite() {
            return Err(Error::NonFinite("Q"));
        }
        if !b.is_finite() {
            return Err(Error::NonFinite("B"));
        }
        let defect = q.orthonormality_defect();
        if defect > 1e-10 * (n.max(1) as f64).sqrt() {
            return Err(Error::NotOrthonormal(defect));
        }
        let asym = b.asymmetry();
        if asym > 1e-12 * b.frobenius_norm().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self { alpha, q, b })
    }

    /// `αI` on `R^m` with an empty low-rank part.
    pub fn scaled_identity(m: usize, alpha: f64) -> Result<Self> {
        Self::new(alpha, Matrix::zeros(m, 0), Matrix::zeros(0, 0))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    /// Ambient dimension m.
    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    /// Number of basis columns n.
    pub fn rank(&self) -> usize {
        self.q.cols()
    }

    pub(crate) fn from_parts_unchecked(alpha: f64, q: Matrix, b: Matrix) -> Self {
        Self { alpha, q, b }
    }
}

/// Signed update `XXᵀ − YYᵀ`, with `X` holding `√wᵢ·xᵢ` for positive weights
/// and `Y` holding `√(−wᵢ)·xᵢ` for negative ones.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedData {
    x: Matrix,
    y: Matrix,
}

impl WeightedData {
    pub fn new(x: Matrix, y: Matrix) -> Result<Self> {
        if x.rows() != y.rows() {
            return Err(Error::Dimension(format!(
                "X has {} rows but Y has {}",
                x.rows(),
                y.rows()
            )));
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("X"));
        }
        if !y.is_finite() {
            return Err(Error::NonFinite("Y"));
        }
        Ok(Self { x, y })
    }

    pub fn empty(m: usize) -> Self {
        Self {
            x: Matrix::zeros(m, 0),
            y: Matrix::zeros(m, 0),
        }
    }

    /// Splits `(xᵢ, wᵢ)` pairs by weight sign; zero weights are dropped.
    pub fn from_weighted(m: usize, vectors: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        if vectors.len() != weights.len() {
            return Err(Error::Dimension(format!(
                "{} vectors but {} weights",
                vectors.len(),
                weights.len()
            )));
        }
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (i, (v, &w)) in vectors.iter().zip(weights).enumerate() {
            if v.len() != m {
                return Err(Error::Dimension(format!(
                    "vector {i} has length {}, expected {m}",
                    v.len()
                )));
            }
            if !w.is_finite() {
                return Err(Error::NonFinite("weights"));
            }
            if w == 0.0 {
                continue;
            }
            let scale = w.abs().sqrt();
            let col: Vec<f64> = v.iter().map(|x| scale * x).collect();
            if w > 0.0 {
                pos.push(col);
            } else {
                neg.push(col);
            }
        }
        Self::new(
            Matrix::from_columns(m, &pos)?,
            Matrix::from_columns(m, &neg)?,
        )
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &Matrix {
        &self.y
    }

    pub fn dim(&self) -> usize {
        self.x.rows()
    }

    /// `nx + ny`
    pub fn len(&self) -> usize {
        self.x.cols() + self.y.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Thin eigendecomposition `αI + E·diag(D)·Eᵀ`.
///
/// The full spectrum of the represented m×m matrix is `{α + dᵢ}` together
/// with `α` repeated `m − r` times.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenFactor {
    alpha: f64,
    vectors: Matrix,
    values: Vec<f64>,
}

impl EigenFactor {
    pub fn new(alpha: f64, vectors: Matrix, values: Vec<f64>) -> Result<Self> {
        if vectors.cols() != values.len() {
            return Err(Error::Dimension(format!(
                "{} eigenvectors but {} eigenvalues",
                vectors.cols(),
                values.len()
            )));
        }
        if !alpha.is_finite() || !vectors.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("eigen factor"));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "eigenvalues must be sorted descending".into(),
            ));
        }
        let r = values.len();
        let defect = vectors.orthonormality_defect();
        if defect > 1e-10 * (r.max(1) as f64).sqrt() {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(Self {
            alpha,
            vectors,
            values,
        })
    }

    pub(crate) fn from_parts_unchecked(alpha: f64, vectors: Matrix, values: Vec<f64>) -> Self {
        Self {
            alpha,
            vectors,
            values,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// m×r, orthonormal columns.
    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    /// The offsets `dᵢ`, descending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.vectors.rows()
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    /// Eigenvalues `α + dᵢ` of the explicit pairs, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.values.iter().map(|d| self.alpha + d).collect()
    }

    /// All m eigenvalues, descending.
    pub fn full_spectrum(&self) -> Vec<f64> {
        let mut all = self.eigenvalues();
        all.extend(std::iter::repeat_n(self.alpha, self.dim() - self.rank()));
        all.sort_by(|a, b| b.total_cmp(a));
        all
    }

    /// Reinterprets the factor as `αI + QBQᵀ` with `B = diag(D)`.
    pub fn to_low_rank(&self) -> Result<LowRankFactor> {
        LowRankFactor::new(
            self.alpha,
            self.vectors.clone(),
            Matrix::from_diag(&self.values),
        )
    }
}

/// Update sign in [`augment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Result of [`augment`]: `QBQᵀ ± XXᵀ = Q_c·B_c·Q_cᵀ`.
#[derive(Debug, Clone)]
pub struct Augmented {
    /// m×(n + k'), orthonormal columns.
    pub q: Matrix,
    /// (n + k')×(n + k'), symmetric.
    pub b: Matrix,
    /// Number of singular directions of the residual dropped as numerically zero (`k − k'`).
    pub dropped: usize,
}

/// Rewrites `QBQᵀ ± XXᵀ` as `Q_c·B_c·Q_cᵀ` over the basis `[Q  U_x]`.
///
/// `U_x` spans the part of `X` outside `range(Q)`. Residual singular values
/// at or below [`RANK_TOL`]` · max(σ_max, ‖X‖_F)` are discarded, so the
/// basis grows by `k' ≤ k` columns.
pub fn augment(q: &Matrix, b: &Matrix, x: &Matrix, sign: Sign) -> Result<Augmented> {
    let (m, n) = q.shape();
    let k = x.cols();
    if b.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "B is {}x{} but Q has {n} columns",
            b.rows(),
            b.cols()
        )));
    }
    if x.rows() != m {
        return Err(Error::Dimension(format!(
            "X has {} rows but Q has {m}",
            x.rows()
        )));
    }
    if n + k > m {
        return Err(Error::RankExceedsDimension {
            rank: n + k,
            dim: m,
        });
    }
    if k == 0 {
        return Ok(Augmented {
            q: q.clone(),
            b: b.clone(),
            dropped: 0,
        });
    }

    let (p, residual) = orthonormal_residual(q, x)?;
    let svd = thin_svd(&residual)?;
    let sigma_max = svd.s.first().copied().unwrap_or(0.0);
    let cutoff = RANK_TOL * sigma_max.max(x.frobenius_norm());
    let keep = svd.s.iter().take_while(|&&s| s > cutoff).count();

    let kept: Vec<usize> = (0..keep).collect();
    let mut u = svd.u.select_columns(&kept);
    if n > 0 {
        // The kept directions are only orthogonal to Q up to ε‖X‖/σ; clean them.
        dense::orthonormalize_columns(&mut u, Some(q));
    }

    // R_x = S_x V_xᵀ restricted to the kept triplets.
    let mut r = Matrix::zeros(keep, k);
    for i in 0..keep {
        for j in 0..k {
            r[(i, j)] = svd.s[i] * svd.v[(j, i)];
        }
    }

    let sgn = sign.factor();
    let top_left = b.add(&p.matmul_t(&p).scaled(sgn));
    let top_right = p.matmul_t(&r).scaled(sgn);
    let bottom_right = r.matmul_t(&r).scaled(sgn);

    let size = n + keep;
    let mut bc = Matrix::zeros(size, size);
    for j in 0..n {
        for i in 0..n {
            bc[(i, j)] = top_left[(i, j)];
        }
    }
    for j in 0..keep {
        for i in 0..n {
            bc[(i, n + j)] = top_right[(i, j)];
            bc[(n + j, i)] = top_right[(i, j)];
        }
        for i in 0..keep {
            bc[(n + i, n + j)] = bottom_right[(i, j)];
        }
    }

    Ok(Augmented {
        q: q.hcat(&u),
        b: bc,
        dropped: k - keep,
    })
}

/// Thin eigendecomposition of `αI + Q_a·B_a·Q_aᵀ` from the small core:
/// `E = Q_a·E_b`, `D = D_b`.
pub fn factor_to_eig(alpha: f64, q: &Matrix, b: &Matrix) -> Result<EigenFactor> {
    if b.shape() != (q.cols(), q.cols()) {
        return Err(Error::Dimension(format!(
            "B is {}x{} but Q has {} columns",
            b.rows(),
            b.cols(),
            q.cols()
        )));
    }
    let eig = symmetric_eig(b)?;
    Ok(EigenFactor {
        alpha,
        vectors: q.matmul(&eig.vectors),
        values: eig.values,
    })
}

/// Eigendecomposition of `αI + QBQᵀ + XXᵀ − YYᵀ`; requires `n + nx + ny ≤ m`.
///
/// The positive part is absorbed first, then the negative part. No switch
/// to the dense path happens here; callers pick [`dense_fallback`] when the
/// combined rank is too large.
pub fn fast_eigh(factor: &LowRankFactor, data: &WeightedData) -> Result<EigenFactor> {
    let m = factor.dim();
    if data.dim() != m {
        return Err(Error::Dimension(format!(
            "data has dimension {} but the factor has {m}",
            data.dim()
        )));
    }
    let total = factor.rank() + data.len();
    if total > m {
        return Err(Error::RankExceedsDimension {
            rank: total,
            dim: m,
        });
    }
    let plus = augment(&factor.q, &factor.b, &data.x, Sign::Plus)?;
    let minus = augment(&plus.q, &plus.b, &data.y, Sign::Minus)?;
    factor_to_eig(factor.alpha, &minus.q, &minus.b)
}

/// Eigendecomposition of `αI + XXᵀ` through the thin SVD of `X`.
///
/// Only valid for nonnegative weights. Numerically zero singular values are
/// dropped with the same rule as [`augment`].
pub fn svd_route(alpha: f64, x: &Matrix) -> Result<EigenFactor> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite("alpha"));
    }
    let svd = thin_svd(x)?;
    let sigma_max = svd.s.first().copied().unwrap_or(0.0);
    let cutoff = RANK_TOL * sigma_max.max(x.frobenius_norm());
    let keep = svd.s.iter().take_while(|&&s| s > cutoff).count();
    let kept: Vec<usize> = (0..keep).collect();
    Ok(EigenFactor {
        alpha,
        vectors: svd.u.select_columns(&kept),
        values: svd.s[..keep].iter().map(|s| s * s).collect(),
    })
}

/// Materializes the m×m matrix and decomposes it densely.
///
/// Returns all m eigenpairs with `alpha = 0`. Always applicable, `O(m³)`.
pub fn dense_fallback(factor: &LowRankFactor, data: &WeightedData) -> Result<EigenFactor> {
    let m = factor.dim();
    if data.dim() != m {
        return Err(Error::Dimension(format!(
            "data has dimension {} but the factor has {m}",
            data.dim()
        )));
    }
    let mut a = factor.q.matmul(&factor.b).matmul_t(&factor.q);
    a = a.add(&data.x.matmul_t(&data.x));
    a = a.sub(&data.y.matmul_t(&data.y));
    for i in 0..m {
        a[(i, i)] += factor.alpha;
    }
    let eig = symmetric_eig(&a.symmetrized())?;
    Ok(EigenFactor {
        alpha: 0.0,
        vectors: eig.vectors,
        values: eig.values,
    })
}
