//! Streaming Mahalanobis-type metric over `A = αI + QBQᵀ`.
//!
//! Each update decays the current matrix, adds the signed outer products of
//! a labeled batch, floors the spectrum to keep `A` positive definite and
//! truncates back to the configured rank.

use crate::error::{Error, Result};
use crate::fast_eigh::{dense_fallback, fast_eigh, EigenFactor, LowRankFactor, WeightedData};
use crate::matrix::norm2;
#[cfg(test)]
use crate::matrix::Matrix;
use crate::truncation::{truncate, TruncationResult};

/// Default floor relative to the current `alpha` when [`UpdateConfig::floor`] is unset.
pub const DEFAULT_RELATIVE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Regular,
    Irregular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateConfig {
    /// Multiplier applied to the current matrix, in (0, 1].
    pub decay: f64,
    /// Multiplier applied to the batch outer products, ≥ 0.
    pub gain: f64,
    /// Maximum number of explicit eigenpairs kept after an update.
    pub rank_cap: usize,
    /// Minimum eigenvalue after an update; `None` means
    /// [`DEFAULT_RELATIVE_FLOOR`] times the current `alpha`.
    pub floor: Option<f64>,
}

impl UpdateConfig {
    pub fn new(decay: f64, gain: f64, rank_cap: usize) -> Self {
        Self {
            decay,
            gain,
            rank_cap,
            floor: None,
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "decay must lie in (0, 1], got {}",
                self.decay
            )));
        }
        if !(self.gain >= 0.0 && self.gain.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gain must be finite and nonnegative, got {}",
                self.gain
            )));
        }
        if self.rank_cap >= m {
            return Err(Error::InvalidRank {
                k: self.rank_cap,
                m,
            });
        }
        if let Some(f) = self.floor {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "floor must be finite and positive, got {f}"
                )));
            }
        }
        Ok(())
    }
}

/// Training vectors with signed weights: positive for regular samples,
/// negative for irregular ones.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBatch {
    vectors: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl LabeledBatch {
    pub fn new(vectors: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if vectors.len() != weights.len() {
            return Err(Error::Dimension(format!(
                "{} vectors but {} weights",
                vectors.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("weights"));
        }
        if vectors.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("batch vectors"));
        }
        Ok(Self { vectors, weights })
    }

    pub fn empty() -> Self {
        Self {
            vectors: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// What happened during one [`MetricModel::update`].
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateReport {
    /// Number of spectrum positions raised to the floor.
    pub floored: usize,
    /// The floor that was applied.
    pub floor: f64,
    /// `None` when the updated matrix already fit within the rank cap.
    pub truncation: Option<TruncationResult>,
    /// Whether the combined rank forced the dense path.
    pub dense_path: bool,
}

/// Immutable positive definite model `A = αI + QBQᵀ` with its eigen form cached.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricModel {
    factor: LowRankFactor,
    eigen: EigenFactor,
}

impl MetricModel {
    pub fn new(factor: LowRankFactor) -> Result<Self> {
        let eigen = crate::fast_eigh::factor_to_eig(factor.alpha(), factor.q(), factor.b())?;
        Self::from_parts(factor, eigen)
    }

    /// `alpha·I` on `R^m`.
    pub fn scaled_identity(m: usize, alpha: f64) -> Result<Self> {
        Self::new(LowRankFactor::scaled_identity(m, alpha)?)
    }

    fn from_parts(factor: LowRankFactor, eigen: EigenFactor) -> Result<Self> {
        if factor.alpha() <= 0.0 {
            return Err(Error::NonPositiveEigenvalue(factor.alpha()));
        }
        if let Some(&d) = eigen.values().last() {
            let lowest = eigen.alpha() + d;
            if lowest <= 0.0 {
                return Err(Error::NonPositiveEigenvalue(lowest));
            }
        }
        Ok(Self { factor, eigen })
    }

    pub fn factor(&self) -> &LowRankFactor {
        &self.factor
    }

    pub fn eigen(&self) -> &EigenFactor {
        &self.eigen
    }

    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    pub fn rank(&self) -> usize {
        self.factor.rank()
    }

    pub fn alpha(&self) -> f64 {
        self.factor.alpha()
    }

    /// `√(xᵀA⁻¹x)` in `O(mr)`.
    ///
    /// With `c = Eᵀx` and `x⊥ = x − Ec`, `xᵀA⁻¹x = ‖x⊥‖²/α + Σ cᵢ²/(α + dᵢ)`.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        let m = self.dim();
        if x.len() != m {
            return Err(Error::Dimension(format!(
                "vector has length {} but the model has dimension {m}",
                x.len()
            )));
        }
        let e = self.eigen.vectors();
        let alpha = self.eigen.alpha();
        let c = e.t_matvec(x);
        let mut perp = x.to_vec();
        for (j, &cj) in c.iter().enumerate() {
            crate::matrix::axpy(-cj, e.col(j), &mut perp);
        }
        let r = norm2(&perp);
        let mut sq = r * r / alpha;
        for (&cj, &d) in c.iter().zip(self.eigen.values()) {
            let lambda = alpha + d;
            if lambda <= 0.0 {
                return Err(Error::NonPositiveEigenvalue(lambda));
            }
            sq += cj * cj / lambda;
        }
        Ok(sq.sqrt())
    }

    /// Regular iff `distance(x) ≤ threshold`.
    pub fn classify(&self, x: &[f64], threshold: f64) -> Result<Label> {
        Ok(if self.distance(x)? <= threshold {
            Label::Regular
        } else {
            Label::Irregular
        })
    }

    /// All m eigenvalues of `A`, descending.
    pub fn full_spectrum(&self) -> Vec<f64> {
        self.eigen.full_spectrum()
    }

    /// `decay·A + gain·Σ wᵢxᵢxᵢᵀ`, floored and truncated to `cfg.rank_cap`.
    ///
    /// Uses the dense path when the combined rank exceeds m.
    pub fn update(&self, batch: &LabeledBatch, cfg: &UpdateConfig) -> Result<(Self, UpdateReport)> {
        let m = self.dim();
        cfg.validate(m)?;
        let weights: Vec<f64> = batch.weights.iter().map(|w| cfg.gain * w).collect();
        let data = WeightedData::from_weighted(m, &batch.vectors, &weights)?;
        let decayed = LowRankFactor::new(
            cfg.decay * self.alpha(),
            self.factor.q().clone(),
            self.factor.b().scaled(cfg.decay),
        )?;

        let dense_path = decayed.rank() + data.len() > m;
        let ef = if dense_path {
            dense_fallback(&decayed, &data)?
        } else {
            fast_eigh(&decayed, &data)?
        };

        let floor = cfg.floor.unwrap_or(DEFAULT_RELATIVE_FLOOR * self.alpha());
        let (ef, floored) = apply_floor(&ef, floor);

        if ef.rank() <= cfg.rank_cap && ef.alpha() > 0.0 {
            let factor = ef.to_low_rank()?;
            let model = Self::from_parts(factor, ef)?;
            return Ok((
                model,
                UpdateReport {
                    floored,
                    floor,
                    truncation: None,
                    dense_path,
                },
            ));
        }

        let (factor, result) = truncate(&ef, cfg.rank_cap)?;
        let eigen = EigenFactor::from_parts_unchecked(
            factor.alpha(),
            factor.q().clone(),
            factor.b().diag(),
        );
        let model = Self::from_parts(factor, eigen)?;
        Ok((
            model,
            UpdateReport {
                floored,
                floor,
                truncation: Some(result),
                dense_path,
            },
        ))
    }
}

/// Raises every eigenvalue below `floor` to `floor`, including the implicit
/// `α` block when it is present.
fn apply_floor(ef: &EigenFactor, floor: f64) -> (EigenFactor, usize) {
    let implicit = ef.dim() - ef.rank();
    let mut floored = 0;
    let alpha = if implicit > 0 && ef.alpha() < floor {
        floored += implicit;
        floor
    } else {
        ef.alpha()
    };
    let values: Vec<f64> = ef
        .values()
        .iter()
        .map(|&d| {
            let lambda = ef.alpha() + d;
            if lambda < floor {
                floored += 1;
                floor - alpha
            } else {
                lambda - alpha
            }
        })
        .collect();
    if floored == 0 {
        return (ef.clone(), 0);
    }
    (
        EigenFactor::from_parts_unchecked(alpha, ef.vectors().clone(), values),
        floored,
    )
}
