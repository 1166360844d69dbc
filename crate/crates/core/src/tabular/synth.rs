use super::{DataError, Dataset};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Parameters of a synthetic biased population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_total: usize,
    pub privileged_fraction: f64,
    pub positive_rate_privileged: f64,
    pub positive_rate_unprivileged: f64,
    pub feature_dim: usize,
    /// Euclidean distance between the two class means.
    pub class_separation: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<(), DataError> {
        let bad = |m: &str| Err(DataError::BadSyntheticSpec(m.to_string()));
        if self.n_total < 4 {
            return bad("n_total must be at least 4");
        }
        if self.feature_dim < 1 {
            return bad("feature_dim must be at least 1");
        }
        if !(self.privileged_fraction > 0.0 && self.privileged_fraction < 1.0) {
            return bad("privileged_fraction must lie in (0, 1)");
        }
        for r in [self.positive_rate_privileged, self.positive_rate_unprivileged] {
            if !(0.0..=1.0).contains(&r) {
                return bad("positive rates must lie in [0, 1]");
            }
        }
        if !(self.class_separation >= 0.0 && self.class_separation.is_finite()) {
            return bad("class_separation must be a non-negative real");
        }
        Ok(())
    }
}

/// Draws group membership, then the label from the group's positive rate,
/// then features from a unit spherical Gaussian centred at `±sep/2` along
/// the diagonal direction according to the label.
pub fn synthesize(spec: &SyntheticSpec) -> Result<Dataset, DataError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_total;
    let d = spec.feature_dim;
    let offset = spec.class_separation / 2.0 / (d as f64).sqrt();
    let mut labels = Vec::with_capacity(n);
    let mut protected = Vec::with_capacity(n);
    let mut features = Array2::zeros((n, d));
    for i in 0..n {
        let a = rng.random_bool(spec.privileged_fraction);
        let rate = if a {
            spec.positive_rate_privileged
        } else {
            spec.positive_rate_unprivileged
        };
        let y = rng.random_bool(rate);
        let centre = if y { offset } else { -offset };
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            features[[i, j]] = centre + z;
        }
        labels.push(u8::from(y));
        protected.push(u8::from(a));
    }
    let names = (0..d).map(|j| format!("x{j}")).collect();
    let ds = Dataset::new(features, labels, protected, names, format!("synthetic/{}", spec.seed))?;
    Ok(ds.with_numeric_columns((0..d).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::count_groups;

    fn spec() -> SyntheticSpec {
        SyntheticSpec {
            n_total: 4000,
            privileged_fraction: 0.6,
            positive_rate_privileged: 0.5,
            positive_rate_unprivileged: 0.5,
            feature_dim: 3,
            class_separation: 2.0,
            seed: 9,
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(synthesize(&spec()).unwrap(), synthesize(&spec()).unwrap());
        let other = SyntheticSpec { seed: 10, ..spec() };
        assert_ne!(synthesize(&spec()).unwrap(), synthesize(&other).unwrap());
    }

    #[test]
    fn equal_rates_give_similar_group_rates() {
        let c = count_groups(&synthesize(&spec()).unwrap());
        let rp = c.n_pp as f64 / c.n_p as f64;
        let ru = c.n_pup as f64 / c.n_up as f64;
        assert!((rp - ru).abs() < 0.06, "{rp} vs {ru}");
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(synthesize(&SyntheticSpec { n_total: 3, ..spec() }).is_err());
        assert!(synthesize(&SyntheticSpec {
            feature_dim: 0,
            ..spec()
        })
        .is_err());
        assert!(synthesize(&SyntheticSpec {
            privileged_fraction: 1.0,
            ..spec()
        })
        .is_err());
        assert!(synthesize(&SyntheticSpec {
            positive_rate_unprivileged: 1.5,
            ..spec()
        })
        .is_err());
    }
}
