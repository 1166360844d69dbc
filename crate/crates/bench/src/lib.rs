//! Shared fixtures for the benchmarks.

use reweigh_core::{synthesize, Dataset, SyntheticSpec};

/// A seeded synthetic table with a group/label association strong enough
/// that reweighing moves every coefficient away from one.
pub fn fixture(n_total: usize, feature_dim: usize) -> Dataset {
    synthesize(&SyntheticSpec {
        n_total,
        privileged_fraction: 0.65,
        positive_rate_privileged: 0.3,
        positive_rate_unprivileged: 0.15,
        feature_dim,
        class_separation: 1.0,
        seed: 7,
    })
    .expect("valid synthetic spec")
}

/// Hard predictions that agree with the labels on roughly 80% of rows.
pub fn noisy_predictions(ds: &Dataset) -> Vec<u8> {
    ds.labels()
        .iter()
        .enumerate()
        .map(|(i, &y)| if i % 5 == 0 { 1 - y } else { y })
        .collect()
}
