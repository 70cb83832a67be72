mod common;

use common::{gaussian, max_abs_diff, rng};
use feigh::oracle::DenseLearner;
use feigh::{LabeledBatch, MetricModel, UpdateConfig};
use proptest::prelude::*;
use rand::Rng;

fn batch(seed: u64, m: usize, size: usize, neg: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut g = rng(seed);
    let v = gaussian(&mut g, size, m)
        .scaled(1.0 / (m as f64).sqrt())
        .to_rows();
    let w = (0..size)
        .map(|i| {
            if i % 2 == 0 {
                g.random_range(0.1..2.0)
            } else {
                -g.random_range(0.0..neg)
            }
        })
        .collect();
    (v, w)
}

#[test]
fn decay_only_scales_distances() {
    let (v, w) = batch(1, 10, 4, 0.2);
    let (model, _) = MetricModel::scaled_identity(10, 2.0)
        .unwrap()
        .update(
            &LabeledBatch::new(v, w).unwrap(),
            &UpdateConfig::new(1.0, 1.0, 3),
        )
        .unwrap();
    let x = gaussian(&mut rng(2), 10, 1).col(0).to_vec();
    let d0 = model.distance(&x).unwrap();
    let cfg = UpdateConfig::new(0.8, 1.0, 3);
    let mut cur = model;
    for t in 1..=6 {
        cur = cur.update(&LabeledBatch::empty(), &cfg).unwrap().0;
        let expected = d0 * 0.8f64.powf(-(t as f64) / 2.0);
        assert!((cur.distance(&x).unwrap() - expected).abs() < 1e-12 * expected);
    }
}

#[test]
fn single_updates_move_own_distance() {
    let model = MetricModel::scaled_identity(6, 1.0).unwrap();
    let x = vec![0.3, -0.2, 0.5, 0.1, 0.0, 0.4];
    let before = model.distance(&x).unwrap();
    let cfg = UpdateConfig::new(1.0, 1.0, 2);
    let up = |w: f64| {
        let b = LabeledBatch::new(vec![x.clone()], vec![w]).unwrap();
        let (m, r) = model.update(&b, &cfg).unwrap();
        assert_eq!(r.floored, 0);
        m.distance(&x).unwrap()
    };
    assert!(up(1.0) < before);
    assert!(up(-0.5) > before);
}

#[test]
fn floored_sequence_keeps_spectrum_in_line_with_dense() {
    let m = 12;
    let cfg = UpdateConfig::new(0.9, 3.0, 3);
    let mut model = MetricModel::scaled_identity(m, 1.0).unwrap();
    let mut dense = DenseLearner::scaled_identity(m, 1.0).unwrap();
    let mut floored = 0;
    for step in 0..5 {
        let (v, w) = batch(40 + step, m, 3, 2.0);
        let (next, r) = model
            .update(&LabeledBatch::new(v.clone(), w.clone()).unwrap(), &cfg)
            .unwrap();
        model = next;
        floored += r.floored;
        dense.update(&v, &w, 0.9, 3.0, 3, None).unwrap();
        assert!(max_abs_diff(&model.full_spectrum(), &dense.spectrum().unwrap()) < 1e-8);
    }
    assert!(floored > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn matches_dense_simulator(
        seed in any::<u64>(),
        m in 10usize..24,
        cap in 1usize..5,
        size in 1usize..6,
        decay in 0.5f64..=1.0,
    ) {
        let cap = cap.min(m - 1);
        let cfg = UpdateConfig::new(decay, 0.5, cap);
        let mut model = MetricModel::scaled_identity(m, 1.0).unwrap();
        let mut dense = DenseLearner::scaled_identity(m, 1.0).unwrap();
        let probes = gaussian(&mut rng(seed ^ 1), m, 3);
        for step in 0..4 {
            let (v, w) = batch(seed.wrapping_add(step), m, size, 0.3);
            let (next, r) = model.update(&LabeledBatch::new(v.clone(), w.clone()).unwrap(), &cfg).unwrap();
            model = next;
            prop_assume!(r.floored == 0);
            let tau = dense.update(&v, &w, decay, 0.5, cap, None).unwrap();
            // When the best window would drop part of the implicit block the
            // learner takes the best window it can represent instead.
            prop_assume!(r.truncation.as_ref().is_none_or(|t| t.tau == tau));
            prop_assert!(max_abs_diff(&model.full_spectrum(), &dense.spectrum().unwrap()) <= 1e-8);
            for j in 0..3 {
                let x = probes.col(j);
                let fast = model.distance(x).unwrap().powi(2);
                let slow = dense.distance(x).unwrap();
                prop_assert!((fast - slow).abs() <= 1e-10 * slow);
            }
        }
    }
}
