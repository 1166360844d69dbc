//! Tabular data model: raw CSV tables, the encoded [`Dataset`], group
//! tallies, splitting and standardization.

mod adult;
mod compas;
mod encode;
mod io;
mod standardize;
mod synth;

pub use adult::{load_adult_dir, prepare_adult, ADULT_COLUMNS};
pub use compas::{prepare_compas, COMPAS_REQUIRED_COLUMNS};
pub use io::{
    load_csv, load_csv_with, read_dataset_csv, read_predictions_csv, write_dataset_csv, Predictions, RawTable,
};
pub use standardize::Standardizer;
pub use synth::{synthesize, SyntheticSpec};

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

/// Seed used for the train/test split when none is given.
pub const DEFAULT_SEED: u64 = 42;
/// Fraction of rows held out for evaluation when none is given.
pub const DEFAULT_TEST_FRACTION: f64 = 0.3;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing header")]
    MissingHeader,
    #[error("row {row}: expected {expected} cells, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("missing expected column `{0}`")]
    MissingColumn(String),
    #[error("unknown protected attribute `{0}` (expected race or sex)")]
    UnknownProtected(String),
    #[error("row {row}: cannot parse `{value}` in column `{column}` as a number")]
    BadNumber { row: usize, column: String, value: String },
    #[error("row {row}: `{column}` must be 0 or 1, found `{value}`")]
    NotBinary { row: usize, column: String, value: String },
    #[error("row {row}: weight {weight} is not strictly positive and finite")]
    BadWeight { row: usize, weight: f64 },
    #[error("length mismatch: {what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("test fraction {fraction} on {n} rows leaves an empty part")]
    EmptySplit { fraction: f64, n: usize },
    #[error("invalid synthetic spec: {0}")]
    BadSyntheticSpec(String),
}

/// Which column acts as the protected attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtectedAttr {
    Race,
    Sex,
}

impl ProtectedAttr {
    pub fn as_str(self) -> &'static str {
        match self {
            ProtectedAttr::Race => "race",
            ProtectedAttr::Sex => "sex",
        }
    }
}

impl fmt::Display for ProtectedAttr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtectedAttr {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "race" => Ok(ProtectedAttr::Race),
            "sex" => Ok(ProtectedAttr::Sex),
            other => Err(DataError::UnknownProtected(other.to_string())),
        }
    }
}

/// The two supported source tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetName {
    Adult,
    Compas,
}

impl DatasetName {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetName::Adult => "adult",
            DatasetName::Compas => "compas",
        }
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "adult" => Ok(DatasetName::Adult),
            "compas" => Ok(DatasetName::Compas),
            other => Err(format!("unknown dataset `{other}` (expected adult or compas)")),
        }
    }
}

/// File name of the COMPAS table inside `<data_dir>/compas/`.
pub const COMPAS_FILE: &str = "compas-scores-two-years.csv";

/// Loads and encodes a dataset from the layout written by `reweigh fetch`:
/// `<data_dir>/adult/adult.{data,test}` or `<data_dir>/compas/` + [`COMPAS_FILE`].
pub fn load_prepared(
    data_dir: impl AsRef<std::path::Path>,
    name: DatasetName,
    protected: ProtectedAttr,
) -> Result<Dataset, DataError> {
    let dir = data_dir.as_ref().join(name.as_str());
    match name {
        DatasetName::Adult => prepare_adult(&load_adult_dir(&dir)?, protected.as_str()),
        DatasetName::Compas => prepare_compas(&load_csv(dir.join(COMPAS_FILE), true)?, protected.as_str()),
    }
}

/// Encoded binary-classification data with a binary protected attribute
/// and a positive weight per row.
///
/// Labels use 1 for the favorable outcome and protected uses 1 for the
/// privileged group.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<u8>,
    protected: Vec<u8>,
    weights: Vec<f64>,
    feature_names: Vec<String>,
    numeric_columns: Vec<usize>,
    provenance: String,
}

impl Dataset {
    /// Builds a dataset with unit weights.
    pub fn new(
        features: Array2<f64>,
        labels: Vec<u8>,
        protected: Vec<u8>,
        feature_names: Vec<String>,
        provenance: impl Into<String>,
    ) -> Result<Self, DataError> {
        let n = labels.len();
        Self::with_all(
            features,
            labels,
            protected,
            vec![1.0; n],
            feature_names,
            Vec::new(),
            provenance.into(),
        )
    }

    pub(crate) fn with_all(
        features: Array2<f64>,
        labels: Vec<u8>,
        protected: Vec<u8>,
        weights: Vec<f64>,
        feature_names: Vec<String>,
        numeric_columns: Vec<usize>,
        provenance: String,
    ) -> Result<Self, DataError> {
        let n = features.nrows();
        let check = |what, found| {
            if found != n {
                Err(DataError::LengthMismatch {
                    what,
                    expected: n,
                    found,
                })
            } else {
                Ok(())
            }
        };
        check("labels", labels.len())?;
        check("protected", protected.len())?;
        check("weights", weights.len())?;
        if feature_names.len() != features.ncols() {
            return Err(DataError::LengthMismatch {
                what: "feature_names",
                expected: features.ncols(),
                found: feature_names.len(),
            });
        }
        for (row, (&y, &a)) in labels.iter().zip(&protected).enumerate() {
            if y > 1 {
                return Err(DataError::NotBinary {
                    row,
                    column: "label".into(),
                    value: y.to_string(),
                });
            }
            if a > 1 {
                return Err(DataError::NotBinary {
                    row,
                    column: "protected".into(),
                    value: a.to_string(),
                });
            }
        }
        validate_weights(&weights)?;
        let features = features.as_standard_layout().into_owned();
        Ok(Dataset {
            features,
            labels,
            protected,
            weights,
            feature_names,
            numeric_columns,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn protected(&self) -> &[u8] {
        &self.protected
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Columns holding continuous values that should be standardized.
    pub fn numeric_columns(&self) -> &[usize] {
        &self.numeric_columns
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn set_provenance(&mut self, provenance: impl Into<String>) {
        self.provenance = provenance.into();
    }

    /// Marks which columns are continuous. Out-of-range indices are dropped.
    pub fn with_numeric_columns(mut self, mut columns: Vec<usize>) -> Self {
        columns.retain(|&c| c < self.n_features());
        columns.sort_unstable();
        columns.dedup();
        self.numeric_columns = columns;
        self
    }

    /// Returns a copy carrying `weights` instead of the current ones.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self, DataError> {
        if weights.len() != self.len() {
            return Err(DataError::LengthMismatch {
                what: "weights",
                expected: self.len(),
                found: weights.len(),
            });
        }
        validate_weights(&weights)?;
        Ok(Dataset {
            weights,
            ..self.clone()
        })
    }

    /// Returns a copy with all weights reset to 1.
    pub fn with_unit_weights(&self) -> Self {
        Dataset {
            weights: vec![1.0; self.len()],
            ..self.clone()
        }
    }

    pub(crate) fn with_features(&self, features: Array2<f64>) -> Self {
        debug_assert_eq!(features.dim(), self.features.dim());
        Dataset {
            features,
            ..self.clone()
        }
    }

    /// Rows at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Dataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            protected: indices.iter().map(|&i| self.protected[i]).collect(),
            weights: indices.iter().map(|&i| self.weights[i]).collect(),
            feature_names: self.feature_names.clone(),
            numeric_columns: self.numeric_columns.clone(),
            provenance: self.provenance.clone(),
        }
    }
}

fn validate_weights(weights: &[f64]) -> Result<(), DataError> {
    match weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
        Some((row, &weight)) => Err(DataError::BadWeight { row, weight }),
        None => Ok(()),
    }
}

/// Unweighted population tallies over (label, protected).
///
/// Naming follows the reweighing literature: `p`/`up` are the privileged and
/// unprivileged groups, `pos`/`neg` the favorable and unfavorable labels, so
/// `n_pup` counts favorable rows in the unprivileged group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCounts {
    pub n_p: u64,
    pub n_up: u64,
    pub n_pp: u64,
    pub n_np: u64,
    pub n_pup: u64,
    pub n_nup: u64,
    pub n_pos: u64,
    pub n_neg: u64,
    pub n_total: u64,
}

impl GroupCounts {
    /// Builds the full tally from the four (label, group) cells.
    pub fn from_cells(n_pp: u64, n_np: u64, n_pup: u64, n_nup: u64) -> Self {
        GroupCounts {
            n_p: n_pp + n_np,
            n_up: n_pup + n_nup,
            n_pp,
            n_np,
            n_pup,
            n_nup,
            n_pos: n_pp + n_pup,
            n_neg: n_np + n_nup,
            n_total: n_pp + n_np + n_pup + n_nup,
        }
    }

    /// True when all six marginal identities hold.
    pub fn is_consistent(&self) -> bool {
        self.n_p + self.n_up == self.n_total
            && self.n_pos + self.n_neg == self.n_total
            && self.n_pp + self.n_np == self.n_p
            && self.n_pup + self.n_nup == self.n_up
            && self.n_pp + self.n_pup == self.n_pos
            && self.n_np + self.n_nup == self.n_neg
    }
}

/// Tallies rows by (label, protected), ignoring weights.
pub fn count_groups(ds: &Dataset) -> GroupCounts {
    let mut cells = [[0u64; 2]; 2];
    for (&y, &a) in ds.labels().iter().zip(ds.protected()) {
        cells[a as usize][y as usize] += 1;
    }
    GroupCounts::from_cells(cells[1][1], cells[1][0], cells[0][1], cells[0][0])
}

/// Seeded shuffle split into (train, test). Each part keeps the input's row
/// order; `|test| = round(n * test_fraction)`.
pub fn split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset), DataError> {
    let n = ds.len();
    let n_test = (n as f64 * test_fraction).round();
    if !(test_fraction > 0.0 && test_fraction < 1.0) || n_test < 1.0 || n_test >= n as f64 {
        return Err(DataError::EmptySplit {
            fraction: test_fraction,
            n,
        });
    }
    let n_test = n_test as usize;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let (test_idx, train_idx) = order.split_at_mut(n_test);
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    let mut train = ds.select(train_idx);
    let mut test = ds.select(test_idx);
    train.set_provenance(format!("{}/train", ds.provenance()));
    test.set_provenance(format!("{}/test", ds.provenance()));
    Ok((train, test))
}
