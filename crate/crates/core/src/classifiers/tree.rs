//! CART classification trees grown greedily on weighted Gini impurity.
//!
//! Candidate thresholds are midpoints between consecutive distinct feature
//! values present at a node. Splits with equal impurity (within a relative
//! 1e-12) resolve to the lowest feature index, then the lowest threshold.
//! Any split that separates an impure node is accepted, even one that does
//! not reduce impurity, so XOR-like structure is reachable.

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    /// Minimum number of distinct training rows in a leaf.
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
        }
    }
}

impl TreeParams {
    pub(crate) fn validate(&self) -> Result<(), ModelError> {
        if self.min_samples_leaf == 0 {
            return Err(ModelError::BadHyperparameter("min_samples_leaf must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Node {
    Leaf {
        /// Weighted fraction of class 1 among the leaf's training rows.
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    depth: usize,
}

/// Per-feature sorted distinct values and the rank of every row's value.
pub(crate) struct ColumnIndex {
    n: usize,
    values: Vec<Vec<f64>>,
    ranks: Vec<u32>,
}

impl ColumnIndex {
    pub(crate) fn new(x: ArrayView2<f64>) -> Self {
        let (n, d) = x.dim();
        let mut values = Vec::with_capacity(d);
        let mut ranks = vec![0u32; n * d];
        let mut order: Vec<usize> = (0..n).collect();
        for f in 0..d {
            let col = x.column(f);
            order.sort_unstable_by(|&a, &b| col[a].total_cmp(&col[b]));
            let mut uniq: Vec<f64> = Vec::new();
            for &i in &order {
                if uniq.last() != Some(&col[i]) {
                    uniq.push(col[i]);
                }
                ranks[f * n + i] = (uniq.len() - 1) as u32;
            }
            values.push(uniq);
        }
        ColumnIndex { n, values, ranks }
    }

    fn rank(&self, feature: usize, row: usize) -> usize {
        self.ranks[feature * self.n + row] as usize
    }
}

#[derive(Clone, Copy)]
struct Bin {
    rank: u32,
    pos: f64,
    neg: f64,
    count: u32,
}

#[derive(Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Grows one tree over the rows it is given. `weights` is indexed by
/// original row number.
pub(crate) struct Grower<'a> {
    index: &'a ColumnIndex,
    x: ArrayView2<'a, f64>,
    y: &'a [u8],
    weights: &'a [f64],
    params: &'a TreeParams,
    /// Features examined per split; all when `None`.
    max_features: Option<usize>,
    rng: Option<ChaCha8Rng>,
    hist: Vec<Bin>,
    bins: Vec<Bin>,
    pairs: Vec<(u32, u32)>,
    features: Vec<usize>,
}

impl<'a> Grower<'a> {
    pub(crate) fn new(
        index: &'a ColumnIndex,
        x: ArrayView2<'a, f64>,
        y: &'a [u8],
        weights: &'a [f64],
        params: &'a TreeParams,
    ) -> Self {
        let max_k = index.values.iter().map(Vec::len).max().unwrap_or(0);
        let empty = Bin {
            rank: 0,
            pos: 0.0,
            neg: 0.0,
            count: 0,
        };
        Grower {
            index,
            x,
            y,
            weights,
            params,
            max_features: None,
            rng: None,
            hist: vec![empty; max_k],
            bins: Vec::new(),
            pairs: Vec::new(),
            features: (0..x.ncols()).collect(),
        }
    }

    pub(crate) fn with_feature_sampling(mut self, max_features: usize, rng: ChaCha8Rng) -> Self {
        self.max_features = Some(max_features);
        self.rng = Some(rng);
        self
    }

    pub(crate) fn grow(mut self, mut rows: Vec<usize>) -> DecisionTree {
        let mut nodes = vec![Node::Leaf { value: 0.0 }];
        let mut depth = 0;
        // (start, end, depth, slot)
        let mut stack = vec![(0usize, rows.len(), 0usize, 0usize)];
        let mut scratch = Vec::new();
        while let Some((start, end, level, slot)) = stack.pop() {
            depth = depth.max(level);
            let node_rows = &rows[start..end];
            let (pos, neg) = node_rows.iter().fold((0.0, 0.0), |(p, n), &r| {
                if self.y[r] == 1 {
                    (p + self.weights[r], n)
                } else {
                    (p, n + self.weights[r])
                }
            });
            let value = if pos + neg > 0.0 { pos / (pos + neg) } else { 0.0 };
            let stop = pos == 0.0
                || neg == 0.0
                || node_rows.len() < 2 * self.params.min_samples_leaf
                || self.params.max_depth.is_some_and(|d| level >= d);
            let split = if stop {
                None
            } else {
                self.best_split(node_rows, pos + neg)
            };
            let Some(best) = split else {
                nodes[slot] = Node::Leaf { value };
                continue;
            };

            scratch.clear();
            let x = self.x;
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows[start..end]
                .iter()
                .partition(|&&r| x[[r, best.feature]] <= best.threshold);
            scratch.extend(left_rows);
            let mid = start + scratch.len();
            scratch.extend(right_rows);
            rows[start..end].copy_from_slice(&scratch);

            let left = nodes.len();
            let right = left + 1;
            nodes.push(Node::Leaf { value: 0.0 });
            nodes.push(Node::Leaf { value: 0.0 });
            nodes[slot] = Node::Split {
                feature: best.feature,
                threshold: best.threshold,
                left,
                right,
            };
            stack.push((mid, end, level + 1, right));
            stack.push((start, mid, level + 1, left));
        }
        DecisionTree { nodes, depth }
    }

    /// Fills `self.bins` with per-value tallies of `feature` over `rows`,
    /// in increasing value order.
    fn tally(&mut self, feature: usize, rows: &[usize]) {
        self.bins.clear();
        let k = self.index.values[feature].len();
        if k <= 2 * rows.len() {
            for &r in rows {
                let b = &mut self.hist[self.index.rank(feature, r)];
                if self.y[r] == 1 {
                    b.pos += self.weights[r];
                } else {
                    b.neg += self.weights[r];
                }
                b.count += 1;
            }
            for (rank, b) in self.hist[..k].iter_mut().enumerate() {
                if b.count > 0 {
                    self.bins.push(Bin {
                        rank: rank as u32,
                        ..*b
                    });
                    *b = Bin {
                        rank: 0,
                        pos: 0.0,
                        neg: 0.0,
                        count: 0,
                    };
                }
            }
        } else {
            self.pairs.clear();
            self.pairs
                .extend(rows.iter().map(|&r| (self.index.rank(feature, r) as u32, r as u32)));
            self.pairs.sort_unstable();
            for &(rank, r) in &self.pairs {
                let r = r as usize;
                if self.bins.last().is_none_or(|b| b.rank != rank) {
                    self.bins.push(Bin {
                        rank,
                        pos: 0.0,
                        neg: 0.0,
                        count: 0,
                    });
                }
                let b = self.bins.last_mut().unwrap();
                if self.y[r] == 1 {
                    b.pos += self.weights[r];
                } else {
                    b.neg += self.weights[r];
                }
                b.count += 1;
            }
        }
    }

    fn best_split(&mut self, rows: &[usize], total: f64) -> Option<Candidate> {
        let d = self.features.len();
        let limit = self.max_features.unwrap_or(d).min(d);
        if let Some(rng) = self.rng.as_mut() {
            self.features.sort_unstable();
            self.features.shuffle(rng);
        }
        let tol = 1e-12 * total;
        let min_leaf = self.params.min_samples_leaf as u32;
        let total_count = rows.len() as u32;
        let mut best: Option<Candidate> = None;
        let mut visited = 0;
        for fi in 0..d {
            if visited == limit {
                break;
            }
            let feature = self.features[fi];
            self.tally(feature, rows);
            if self.bins.len() < 2 {
                continue;
            }
            visited += 1;
            let tot_pos: f64 = self.bins.iter().map(|b| b.pos).sum();
            let tot_neg: f64 = self.bins.iter().map(|b| b.neg).sum();
            let (mut lp, mut ln, mut lc) = (0.0, 0.0, 0u32);
            let values = &self.index.values[feature];
            for k in 0..self.bins.len() - 1 {
                let b = self.bins[k];
                lp += b.pos;
                ln += b.neg;
                lc += b.count;
                if lc < min_leaf || total_count - lc < min_leaf {
                    continue;
                }
                let (rp, rn) = (tot_pos - lp, tot_neg - ln);
                let (wl, wr) = (lp + ln, rp + rn);
                if wl <= 0.0 || wr <= 0.0 {
                    continue;
                }
                // maximizing this minimizes the weighted child Gini sum
                let score = (lp * lp + ln * ln) / wl + (rp * rp + rn * rn) / wr;
                let lo = values[b.rank as usize];
                let hi = values[self.bins[k + 1].rank as usize];
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                let better = match best {
                    None => true,
                    Some(c) => {
                        score > c.score + tol
                            || (score >= c.score - tol && (feature, threshold) < (c.feature, c.threshold))
                    }
                };
                if better {
                    best = Some(Candidate {
                        feature,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }
}

impl DecisionTree {
    pub fn fit(params: &TreeParams, x: ArrayView2<f64>, y: &[u8], weights: &[f64]) -> Self {
        let index = ColumnIndex::new(x);
        Grower::new(&index, x, y, weights, params).grow((0..y.len()).collect())
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Leaf class-1 fraction for one feature vector.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub(crate) fn scores(&self, x: ArrayView2<f64>) -> Vec<f64> {
        x.rows()
            .into_iter()
            .map(|r| self.score_row(r.to_slice().expect("standard layout")))
            .collect()
    }

    /// Splits in the tree as (feature, threshold), in node order.
    pub fn splits(&self) -> Vec<(usize, f64)> {
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Split { feature, threshold, .. } => Some((feature, threshold)),
                Node::Leaf { .. } => None,
            })
            .collect()
    }

    /// Leaf values in node order.
    pub fn leaf_values(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Leaf { value } => Some(value),
                Node::Split { .. } => None,
            })
            .collect()
    }
}
