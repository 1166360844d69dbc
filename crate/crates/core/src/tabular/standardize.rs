use super::Dataset;
use serde::{Deserialize, Serialize};

/// Per-column affine map to zero mean and unit variance, fitted on one
/// dataset (normally the training split) and applied to others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    columns: Vec<usize>,
    means: Vec<f64>,
    scales: Vec<f64>,
}

impl Standardizer {
    /// Fits on `ds.numeric_columns()` using unweighted population moments.
    /// Constant columns get scale 1.
    pub fn fit(ds: &Dataset) -> Self {
        let n = ds.len().max(1) as f64;
        let columns = ds.numeric_columns().to_vec();
        let mut means = Vec::with_capacity(columns.len());
        let mut scales = Vec::with_capacity(columns.len());
        for &c in &columns {
            let col = ds.features().column(c);
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            means.push(mean);
            scales.push(if var > 0.0 { var.sqrt() } else { 1.0 });
        }
        Standardizer { columns, means, scales }
    }

    pub fn transform(&self, ds: &Dataset) -> Dataset {
        let mut x = ds.features().clone();
        for ((&c, &m), &s) in self.columns.iter().zip(&self.means).zip(&self.scales) {
            x.column_mut(c).mapv_inplace(|v| (v - m) / s);
        }
        ds.with_features(x)
    }
}
