//! Rank truncation in log-spectrum least squares.
//!
//! Of the m sorted eigenvalues, a window of `m − k` consecutive ones is
//! replaced by its geometric mean; the `τ` largest and `k − τ` smallest
//! eigenpairs are kept. `τ` minimizes the squared deviation of the window's
//! log-eigenvalues from their mean.

use crate::error::{Error, Result};
use crate::fast_eigh::{EigenFactor, LowRankFactor};
use crate::matrix::Matrix;

/// A run of equal eigenvalues in the sorted spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumBlock {
    pub value: f64,
    /// Indices of explicit eigenpairs carrying this value.
    pub explicit: Vec<usize>,
    /// Positions filled by the implicit `α` eigenspace.
    pub implicit: usize,
}

impl SpectrumBlock {
    pub fn multiplicity(&self) -> usize {
        self.explicit.len() + self.implicit
    }
}

/// Full sorted spectrum as (value, multiplicity) blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    blocks: Vec<SpectrumBlock>,
    total: usize,
}

impl Spectrum {
    /// Builds the spectrum from explicit eigenvalues (indexed by position in
    /// `explicit`) plus `implicit_count` copies of `implicit_value`.
    ///
    /// Every value must be strictly positive.
    pub fn new(explicit: &[f64], implicit_value: f64, implicit_count: usize) -> Result<Self> {
        let mut entries: Vec<(f64, Option<usize>)> = explicit
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, Some(i)))
            .collect();
        if implicit_count > 0 {
            entries.push((implicit_value, None));
        }
        for &(v, _) in &entries {
            if !v.is_finite() {
                return Err(Error::NonFinite("spectrum"));
            }
            if v <= 0.0 {
                return Err(Error::NonPositiveEigenvalue(v));
            }
        }
        // Stable: explicit pairs keep their order, implicit after explicit on ties.
        entries.sort_by(|a, b| b.0.total_cmp(&a.0));

        let mut blocks: Vec<SpectrumBlock> = Vec::new();
        for (v, src) in entries {
            if blocks.last().is_none_or(|b| b.value != v) {
                blocks.push(SpectrumBlock {
                    value: v,
                    explicit: Vec::new(),
                    implicit: 0,
                });
            }
            let block = blocks.last_mut().expect("pushed above");
            match src {
                Some(i) => block.explicit.push(i),
                None => block.implicit += implicit_count,
            }
        }
        Ok(Self {
            blocks,
            total: explicit.len() + implicit_count,
        })
    }

    /// Spectrum of `αI + E·diag(D)·Eᵀ`: values `α + dᵢ` plus `α` for the
    /// remaining `m − r` positions.
    pub fn from_eigen_factor(ef: &EigenFactor) -> Result<Self> {
        Self::new(&ef.eigenvalues(), ef.alpha(), ef.dim() - ef.rank())
    }

    pub fn blocks(&self) -> &[SpectrumBlock] {
        &self.blocks
    }

    /// m
    pub fn total(&self) -> usize {
        self.total
    }

    /// Overlap of each block with sorted positions `[lo, hi)`.
    fn overlaps(&self, lo: usize, hi: usize) -> impl Iterator<Item = (&SpectrumBlock, usize)> {
        let mut start = 0;
        self.blocks.iter().map(move |b| {
            let end = start + b.multiplicity();
            let c = end.min(hi).saturating_sub(start.max(lo));
            start = end;
            (b, c)
        })
    }

    /// Mean of `ln d` over positions `[lo, hi)`, and the sum of squared
    /// deviations from it.
    fn window_stats(&self, lo: usize, hi: usize) -> (f64, f64) {
        let len = (hi - lo) as f64;
        // Shift by the first log so that an all-equal window has exactly zero spread.
        let mut reference = None;
        let mut shifted = 0.0;
        for (b, c) in self.overlaps(lo, hi) {
            if c == 0 {
                continue;
            }
            let l = b.value.ln();
            let r = *reference.get_or_insert(l);
            shifted += c as f64 * (l - r);
        }
        let Some(r) = reference else {
            return (0.0, 0.0);
        };
        let mean = r + shifted / len;
        let spread = self
            .overlaps(lo, hi)
            .filter(|&(_, c)| c > 0)
            .map(|(b, c)| {
                let dev = b.value.ln() - mean;
                c as f64 * dev * dev
            })
            .sum();
        (mean, spread)
    }

    /// Squared log-deviation of the window `[τ, τ + m − k)` about its mean.
    pub fn window_objective(&self, tau: usize, k: usize) -> f64 {
        self.window_stats(tau, tau + self.total - k).1
    }

    /// True when every kept position (outside the window) has an explicit eigenvector.
    pub fn window_is_feasible(&self, tau: usize, k: usize) -> bool {
        let lo = tau;
        let hi = tau + self.total - k;
        self.overlaps(lo, hi)
            .all(|(b, c)| b.multiplicity() - c <= b.explicit.len())
    }
}

/// Outcome of [`truncate`].
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationResult {
    /// Geometric mean of the replaced window.
    pub new_alpha: f64,
    /// Number of largest eigenvalues kept.
    pub tau: usize,
    /// `(eigenvalue, eigenvector index)` of the τ largest, descending.
    pub kept_top: Vec<(f64, usize)>,
    /// `(eigenvalue, eigenvector index)` of the k − τ smallest, descending.
    pub kept_bottom: Vec<(f64, usize)>,
}

fn check_rank(s: &Spectrum, k: usize) -> Result<()> {
    if k >= s.total {
        return Err(Error::InvalidRank { k, m: s.total });
    }
    Ok(())
}

/// τ ∈ {0, …, k} minimizing the window objective; ties go to the smallest τ.
pub fn select_tau(s: &Spectrum, k: usize) -> Result<usize> {
    check_rank(s, k)?;
    Ok(argmin((0..=k).map(|t| (t, s.window_objective(t, k)))).expect("range is non-empty"))
}

/// Like [`select_tau`], restricted to windows whose kept positions all carry
/// explicit eigenvectors.
pub fn select_feasible_tau(s: &Spectrum, k: usize) -> Result<usize> {
    check_rank(s, k)?;
    argmin(
        (0..=k)
            .filter(|&t| s.window_is_feasible(t, k))
            .map(|t| (t, s.window_objective(t, k))),
    )
    .ok_or(Error::InfeasibleTruncation)
}

/// Relative gap below which two window objectives count as tied.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// Smallest candidate whose value is within [`TIE_TOLERANCE`] of the minimum,
/// so that exact ties are not decided by rounding.
fn argmin(candidates: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    let all: Vec<(usize, f64)> = candidates.collect();
    let best = all.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    all.into_iter()
        .find(|&(_, v)| v <= best + TIE_TOLERANCE * best)
        .map(|(t, _)| t)
}

/// Approximates `ef` by `ᾱI + Σ (dᵢ − ᾱ)qᵢqᵢᵀ` over the k kept eigenpairs.
///
/// The kept eigenvalues are preserved exactly and the window collapses to
/// its geometric mean ᾱ.
pub fn truncate(ef: &EigenFactor, k: usize) -> Result<(LowRankFactor, TruncationResult)> {
    let s = Spectrum::from_eigen_factor(ef)?;
    let tau = select_feasible_tau(&s, k)?;
    let lo = tau;
    let hi = tau + s.total - k;
    let (mean, _) = s.window_stats(lo, hi);
    let mut covered = s.overlaps(lo, hi).filter(|&(_, c)| c > 0);
    let new_alpha = match (covered.next(), covered.next()) {
        (Some((b, _)), None) => b.value,
        _ => mean.exp(),
    };

    let mut kept_top = Vec::with_capacity(tau);
    let mut kept_bottom = Vec::with_capacity(k - tau);
    let mut start = 0;
    for b in &s.blocks {
        let end = start + b.multiplicity();
        let above = lo.min(end).saturating_sub(start);
        let below = end.saturating_sub(hi.max(start));
        for &i in &b.explicit[..above] {
            kept_top.push((b.value, i));
        }
        for &i in &b.explicit[b.explicit.len() - below..] {
            kept_bottom.push((b.value, i));
        }
        start = end;
    }

    let idx: Vec<usize> = kept_top
        .iter()
        .chain(&kept_bottom)
        .map(|&(_, i)| i)
        .collect();
    let offsets: Vec<f64> = kept_top
        .iter()
        .chain(&kept_bottom)
        .map(|&(v, _)| v - new_alpha)
        .collect();
    let model = LowRankFactor::from_parts_unchecked(
        new_alpha,
        ef.vectors().select_columns(&idx),
        Matrix::from_diag(&offsets),
    );
    Ok((
        model,
        TruncationResult {
            new_alpha,
            tau,
            kept_top,
            kept_bottom,
        },
    ))
}
