use super::tree::{ColumnIndex, DecisionTree, Grower, TreeParams};
use ndarray::ArrayView2;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features examined per split; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: None,
            tree: TreeParams::default(),
        }
    }
}

/// Bagged CART trees with per-split feature subsampling.
///
/// Sample weights enter only through the bootstrap: each tree sees `n`
/// rows drawn with replacement, with probability proportional to weight.
/// Inside a tree a row counts once per draw. The score is the fraction of
/// trees voting for class 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn fit(params: &ForestParams, x: ArrayView2<f64>, y: &[u8], w: &[f64], seed: u64) -> Self {
        let n = y.len();
        let d = x.ncols();
        let m = params
            .max_features
            .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
            .clamp(1, d.max(1));
        let index = ColumnIndex::new(x);
        let sampler = WeightedIndex::new(w).expect("weights are positive and finite");
        let trees = (0..params.n_trees)
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let mut counts = vec![0.0f64; n];
                for _ in 0..n {
                    counts[sampler.sample(&mut rng)] += 1.0;
                }
                let rows: Vec<usize> = (0..n).filter(|&i| counts[i] > 0.0).collect();
                Grower::new(&index, x, y, &counts, &params.tree)
                    .with_feature_sampling(m, rng)
                    .grow(rows)
            })
            .collect();
        RandomForest { trees }
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.trees.iter().map(DecisionTree::n_nodes).sum()
    }

    pub(crate) fn scores(&self, x: ArrayView2<f64>) -> Vec<f64> {
        let k = self.trees.len() as f64;
        x.rows()
            .into_iter()
            .map(|r| {
                let r = r.to_slice().expect("standard layout");
                let votes = self.trees.iter().filter(|t| t.score_row(r) >= 0.5).count();
                votes as f64 / k
            })
            .collect()
    }
}
