//! Shared fixtures for the criterion benchmarks under `benches/`.

use multiconf_core::synth::generate;
use multiconf_core::{MultiUserDataset, PredictionRecord, SynthConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Synthetic dataset with `per_class` rows per user and class.
pub fn dataset(per_class: usize, dims: usize) -> MultiUserDataset {
    generate(&SynthConfig {
        n_users: 4,
        n_classes: 6,
        per_user_per_class: per_class,
        dims,
        user_shift: 1.0,
        ..SynthConfig::default()
    })
    .expect("valid synth config")
}

/// Random prediction records over `k` classes.
pub fn records(n: usize, k: usize, seed: u64) -> Vec<PredictionRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| PredictionRecord {
            set: (0..k).filter(|_| rng.random_bool(0.3)).collect(),
            p_values: (0..k).map(|_| rng.random::<f64>()).collect(),
            point: rng.random_range(0..k),
            truth: rng.random_range(0..k),
            user: rng.random_range(0..4),
        })
        .collect()
}
