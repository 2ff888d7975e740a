use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Dataset, ModelError, Result};
use crate::seed::{derive_seed, rng_from_seed};

/// Class centres with pairwise distance `separation` when `num_classes <= num_features`.
///
/// Two classes sit at `±separation/2` on the first axis. Up to `num_features`
/// classes sit on scaled basis vectors. Beyond that, centres are seeded random
/// directions of radius `separation/2`, so the spacing is only approximate.
fn class_means(
    num_features: usize,
    num_classes: usize,
    separation: f64,
    seed: u64,
) -> Vec<Vec<f64>> {
    if num_classes == 2 {
        let mut a = vec![0.0; num_features];
        let mut b = vec![0.0; num_features];
        a[0] = -separation / 2.0;
        b[0] = separation / 2.0;
        return vec![a, b];
    }
    if num_classes <= num_features {
        let radius = separation / std::f64::consts::SQRT_2;
        return (0..num_classes)
            .map(|c| {
                let mut m = vec![0.0; num_features];
                m[c] = radius;
                m
            })
            .collect();
    }
    let mut rng = rng_from_seed(derive_seed(seed, "synthetic/means", 0));
    (0..num_classes)
        .map(|_| {
            let dir: Vec<f64> = (0..num_features)
                .map(|_| rng.sample(StandardNormal))
                .collect();
            let norm = dir
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
                .max(f64::MIN_POSITIVE);
            dir.into_iter()
                .map(|v| v / norm * separation / 2.0)
                .collect()
        })
        .collect()
}

/// Per-client Gaussian class clusters (unit variance) around shared class
/// centres. Labels are balanced within ±1 per client.
pub fn generate_synthetic(
    num_clients: usize,
    per_client: usize,
    num_features: usize,
    num_classes: usize,
    separation: f64,
    seed: u64,
) -> Result<Vec<Dataset>> {
    if num_clients == 0 || per_client == 0 || num_features == 0 || num_classes == 0 {
        return Err(ModelError::InvalidConfig(
            "synthetic data counts must all be >= 1".into(),
        ));
    }
    if !separation.is_finite() || separation < 0.0 {
        return Err(ModelError::InvalidConfig(format!(
            "separation must be finite and >= 0, got {separation}"
        )));
    }
    let means = class_means(num_features, num_classes, separation, seed);

    (0..num_clients)
        .map(|client| {
            let mut rng = rng_from_seed(derive_seed(seed, "synthetic/client", client as u64));
            let mut labels: Vec<usize> = (0..per_client).map(|i| i % num_classes).collect();
            labels.shuffle(&mut rng);
            let mut features = Vec::with_capacity(per_client * num_features);
            for &label in &labels {
                for &centre in &means[label] {
                    let noise: f64 = rng.sample(StandardNormal);
                    features.push(centre + noise);
                }
            }
            Dataset::new(features, num_features, labels, num_classes)
        })
        .collect()
}
