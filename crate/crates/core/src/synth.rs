//! Small synthetic datasets for tests and smoke runs.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{Dataset, Sample};
use crate::linalg::SparseVec;
use crate::rng::stream_rng;

/// Two gaussian blobs in the plane (centers (-2, -2) and (2, 2), unit
/// variance) with a bias column, labelled 0/1. Linearly separable up to
/// rare outliers.
pub fn blobs(n: usize, seed: u64) -> Dataset {
    let mut rng = stream_rng(seed, 0xB10B);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % 2;
        let center = if label == 0 { -2.0 } else { 2.0 };
        let x0 = center + normal.sample(&mut rng);
        let x1 = center + normal.sample(&mut rng);
        let features = SparseVec::new(vec![(0, x0), (1, x1), (2, 1.0)], 3).unwrap();
        samples.push(Sample { features, label, target: label as f64 });
    }
    let label_map: BTreeMap<String, usize> =
        [("0".to_string(), 0), ("1".to_string(), 1)].into_iter().collect();
    Dataset { samples, n_features: 3, n_classes: 2, label_map, has_bias: true }
}

/// Linear-regression dataset `y = w . x + intercept + noise` over dense
/// random features plus an absorbed intercept column (the constant column
/// also keeps `x . x >= 1`, which greedy stepping assumes).
pub fn noisy_linear(n: usize, w: &[f64], intercept: f64, noise: f64, seed: u64) -> Dataset {
    let mut rng = stream_rng(seed, 0x11EA);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let p = w.len();
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let mut entries: Vec<(usize, f64)> =
            (0..p).map(|j| (j, rng.gen_range(-1.0..1.0))).collect();
        entries.push((p, 1.0));
        let y: f64 = entries[..p].iter().map(|&(j, v)| w[j] * v).sum::<f64>()
            + intercept
            + noise * normal.sample(&mut rng);
        let features = SparseVec::new(entries, p + 1).unwrap();
        samples.push(Sample { features, label: 0, target: y });
    }
    Dataset { samples, n_features: p + 1, n_classes: 1, label_map: BTreeMap::new(), has_bias: true }
}
