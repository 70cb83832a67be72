//! Log-log scaling fits over summarized timings.

use anyhow::bail;
use serde::Serialize;

use crate::grid::{summarize, BenchRecord, SummaryRow};
use crate::stats::slope;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub algorithm: String,
    /// Slope of ln(median seconds) against ln(m) over the top half of the grid.
    pub slope: f64,
    /// Grid points used for the fit.
    pub fitted_m: Vec<usize>,
    /// Normalized median at the largest fitted m divided by that at the smallest.
    pub normalized_ratio: f64,
}

/// The upper `⌈len/2⌉` points.
fn top_half<T>(rows: &[T]) -> &[T] {
    &rows[rows.len() / 2..]
}

/// One fit per algorithm; each needs at least four grid points.
pub fn fit_scaling(records: &[BenchRecord]) -> anyhow::Result<Vec<ScalingFit>> {
    let summary = summarize(records);
    let mut algorithms: Vec<&str> = summary.iter().map(|s| s.algorithm.as_str()).collect();
    algorithms.dedup();
    if algorithms.is_empty() {
        bail!("no records to fit");
    }

    algorithms
        .into_iter()
        .map(|alg| {
            let rows: Vec<&SummaryRow> = summary.iter().filter(|s| s.algorithm == alg).collect();
            if rows.len() < 4 {
                bail!(
                    "algorithm {alg} has {} grid points; at least 4 are needed",
                    rows.len()
                );
            }
            let top = top_half(&rows);
            let x: Vec<f64> = top.iter().map(|r| (r.m as f64).ln()).collect();
            let y: Vec<f64> = top.iter().map(|r| r.median.ln()).collect();
            let Some(s) = slope(&x, &y) else {
                bail!("degenerate grid for {alg}");
            };
            let first = top.first().expect("non-empty");
            let last = top.last().expect("non-empty");
            Ok(ScalingFit {
                algorithm: alg.to_string(),
                slope: s,
                fitted_m: top.iter().map(|r| r.m).collect(),
                normalized_ratio: last.normalized_median / first.normalized_median,
            })
        })
        .collect()
}

/// Median time of `numerator` over `denominator` at the largest m both share.
pub fn median_ratio_at_largest_m(
    records: &[BenchRecord],
    numerator: &str,
    denominator: &str,
) -> Option<(usize, f64)> {
    let summary = summarize(records);
    summary
        .iter()
        .filter(|s| s.algorithm == numerator)
        .filter_map(|a| {
            summary
                .iter()
                .find(|b| b.algorithm == denominator && b.m == a.m)
                .map(|b| (a.m, a.median / b.median))
        })
        .max_by_key(|&(m, _)| m)
}
