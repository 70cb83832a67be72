//! Metric learner on a synthetic two-cluster stream.
//!
//! Regular samples concentrate on one random low-dimensional subspace and
//! irregular samples on another; both carry isotropic noise. Regular samples
//! enter the update with weight +1 and irregular ones with −1.

use anyhow::Context;
use feigh::{Label, LabeledBatch, Matrix, MetricModel, UpdateConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::instance::random_orthonormal;
use crate::stats::median;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoConfig {
    pub m: usize,
    pub rank_cap: usize,
    pub iters: usize,
    pub seed: u64,
    /// Samples per class in each training batch.
    pub batch_per_class: usize,
    /// Held-out samples per class.
    pub test_per_class: usize,
    pub decay: f64,
    pub gain: f64,
    /// Dimension of each class subspace.
    pub subspace_dim: usize,
    pub signal: f64,
    pub noise: f64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            m: 128,
            rank_cap: 8,
            iters: 20,
            seed: 0,
            batch_per_class: 4,
            test_per_class: 100,
            decay: 0.9,
            gain: 0.05,
            subspace_dim: 2,
            signal: 3.0,
            noise: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelStats {
    pub alpha: f64,
    pub rank: usize,
    pub mean_distance_regular: f64,
    pub mean_distance_irregular: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub floored: usize,
    #[serde(flatten)]
    pub model: ModelStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoReport {
    pub config: DemoConfig,
    pub initial: ModelStats,
    pub iterations: Vec<IterationStats>,
    /// Median training distance under the final model; absent without training.
    pub threshold: Option<f64>,
    /// Held-out accuracy at that threshold.
    pub accuracy: Option<f64>,
}

struct Clusters {
    regular: Matrix,
    irregular: Matrix,
    signal: f64,
    noise: f64,
}

impl Clusters {
    fn sample(&self, rng: &mut ChaCha8Rng, label: Label) -> Vec<f64> {
        let basis = match label {
            Label::Regular => &self.regular,
            Label::Irregular => &self.irregular,
        };
        let z: Vec<f64> = (0..basis.cols())
            .map(|_| self.signal * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut x = basis.matvec(&z);
        for v in &mut x {
            *v += self.noise * rng.sample::<f64, _>(StandardNormal);
        }
        x
    }
}

fn stats(model: &MetricModel, test: &[(Vec<f64>, Label)]) -> anyhow::Result<ModelStats> {
    let mut sums = [0.0; 2];
    let mut counts = [0usize; 2];
    for (x, label) in test {
        let i = (*label == Label::Irregular) as usize;
        sums[i] += model.distance(x)?;
        counts[i] += 1;
    }
    Ok(ModelStats {
        alpha: model.alpha(),
        rank: model.rank(),
        mean_distance_regular: sums[0] / counts[0].max(1) as f64,
        mean_distance_irregular: sums[1] / counts[1].max(1) as f64,
    })
}

pub fn demo_learner(cfg: &DemoConfig) -> anyhow::Result<DemoReport> {
    if cfg.m == 0 || cfg.rank_cap >= cfg.m {
        anyhow::bail!("rank cap {} must be below m = {}", cfg.rank_cap, cfg.m);
    }
    if 2 * cfg.subspace_dim > cfg.m {
        anyhow::bail!(
            "two {}-dimensional subspaces do not fit in m = {}",
            cfg.subspace_dim,
            cfg.m
        );
    }
    if cfg.batch_per_class == 0 || cfg.test_per_class == 0 {
        anyhow::bail!("batch and test sizes must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let clusters = Clusters {
        regular: random_orthonormal(&mut rng, cfg.m, cfg.subspace_dim)?,
        irregular: random_orthonormal(&mut rng, cfg.m, cfg.subspace_dim)?,
        signal: cfg.signal,
        noise: cfg.noise,
    };
    let test: Vec<(Vec<f64>, Label)> = [Label::Regular, Label::Irregular]
        .into_iter()
        .flat_map(|l| std::iter::repeat_n(l, cfg.test_per_class))
        .map(|l| (clusters.sample(&mut rng, l), l))
        .collect();

    let update = UpdateConfig::new(cfg.decay, cfg.gain, cfg.rank_cap);
    let mut model = MetricModel::scaled_identity(cfg.m, 1.0)?;
    let initial = stats(&model, &test)?;
    let mut iterations = Vec::with_capacity(cfg.iters);
    let mut seen: Vec<Vec<f64>> = Vec::new();

    for iteration in 1..=cfg.iters {
        let mut vectors = Vec::with_capacity(2 * cfg.batch_per_class);
        let mut weights = Vec::with_capacity(2 * cfg.batch_per_class);
        for _ in 0..cfg.batch_per_class {
            vectors.push(clusters.sample(&mut rng, Label::Regular));
            weights.push(1.0);
            vectors.push(clusters.sample(&mut rng, Label::Irregular));
            weights.push(-1.0);
        }
        seen.extend(vectors.iter().cloned());
        let batch = LabeledBatch::new(vectors, weights)?;
        let (next, report) = model
            .update(&batch, &update)
            .with_context(|| format!("update {iteration}"))?;
        model = next;
        iterations.push(IterationStats {
            iteration,
            floored: report.floored,
            model: stats(&model, &test)?,
        });
    }

    let (threshold, accuracy) = if seen.is_empty() {
        (None, None)
    } else {
        let train: Vec<f64> = seen
            .iter()
            .map(|x| model.distance(x))
            .collect::<feigh::Result<_>>()?;
        let threshold = median(&train).expect("non-empty");
        let mut correct = 0usize;
        for (x, label) in &test {
            if model.classify(x, threshold)? == *label {
                correct += 1;
            }
        }
        (Some(threshold), Some(correct as f64 / test.len() as f64))
    };

    Ok(DemoReport {
        config: cfg.clone(),
        initial,
        iterations,
        threshold,
        accuracy,
    })
}
