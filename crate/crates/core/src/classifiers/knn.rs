use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

/// Unweighted Euclidean k-nearest-neighbor vote.
///
/// Sample weights are not used: the model stores the training rows as they
/// are and every neighbor counts once. Distance ties go to the lower
/// training-row index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnModel {
    k: usize,
    x: Array2<f64>,
    y: Vec<u8>,
    #[serde(skip)]
    sparse: OnceLock<SparseRows>,
}

/// Non-zero entries of each training row. One-hot encoded tables are mostly
/// zeros, so distances are accumulated over these only.
#[derive(Debug, Clone)]
struct SparseRows {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseRows {
    fn new(x: &Array2<f64>) -> Self {
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in x.rows() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            offsets.push(cols.len());
        }
        SparseRows { offsets, cols, vals }
    }
}

impl KnnModel {
    pub fn fit(params: &KnnParams, x: ArrayView2<f64>, y: &[u8]) -> Self {
        KnnModel {
            k: params.k,
            x: x.as_standard_layout().into_owned(),
            y: y.to_vec(),
            sparse: OnceLock::new(),
        }
    }

    /// Indices of the k nearest training rows, nearest first.
    pub fn neighbors(&self, query: &[f64]) -> Vec<usize> {
        let sp = self.sparse.get_or_init(|| SparseRows::new(&self.x));
        let k = self.k.min(self.y.len());
        // |q|^2 summed over q's own non-zeros in column order, so a training
        // row identical to q yields exactly zero below
        let q_norm: f64 = query.iter().filter(|v| **v != 0.0).map(|v| v * v).sum();
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for i in 0..self.y.len() {
            let (lo, hi) = (sp.offsets[i], sp.offsets[i + 1]);
            let mut shared = 0.0;
            let mut diff = 0.0;
            for (&j, &v) in sp.cols[lo..hi].iter().zip(&sp.vals[lo..hi]) {
                let q = query[j];
                if q != 0.0 {
                    shared += q * q;
                }
                diff += (q - v) * (q - v);
            }
            let dist = (q_norm - shared + diff).max(0.0);
            if best.len() < k || dist < best[best.len() - 1].0 {
                let pos = best.partition_point(|&(d, _)| d <= dist);
                best.insert(pos, (dist, i));
                best.truncate(k);
            }
        }
        best.into_iter().map(|(_, i)| i).collect()
    }

    pub(crate) fn scores(&self, x: ArrayView2<f64>) -> Vec<f64> {
        x.rows()
            .into_iter()
            .map(|r| {
                let q = r.to_vec();
                let nn = self.neighbors(&q);
                nn.iter().filter(|&&i| self.y[i] == 1).count() as f64 / nn.len() as f64
            })
            .collect()
    }
}
