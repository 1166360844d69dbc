//! Weight-aware binary classifiers behind one train / score / predict
//! contract.
//!
//! | kind      | how sample weights enter                                  |
//! |-----------|-----------------------------------------------------------|
//! | `logreg`  | multiply each row's log-likelihood term                   |
//! | `dtree`   | weighted Gini impurity and weighted-majority leaves       |
//! | `knn`     | **ignored**: neighbors vote unweighted                    |
//! | `gnb`     | weighted class priors, means and variances                |
//! | `rforest` | bootstrap draws rows with probability proportional to weight |
//!
//! KNN uses plain Euclidean distance, so it is sensitive to feature scale;
//! inputs are expected to be standardized already.

mod forest;
mod gnb;
mod knn;
pub mod logreg;
mod tree;

pub use forest::{ForestParams, RandomForest};
pub use gnb::{GaussianNb, GnbParams};
pub use knn::{KnnModel, KnnParams};
pub use logreg::{LogRegParams, LogisticModel};
pub use tree::{DecisionTree, TreeParams};

use crate::tabular::Dataset;
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("training data needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("dimension mismatch: model expects {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("threshold {0} outside [0, 1]")]
    BadThreshold(f64),
    #[error("invalid hyperparameter: {0}")]
    BadHyperparameter(String),
    #[error("unknown model kind `{0}` (expected logreg, dtree, knn, gnb or rforest)")]
    UnknownKind(String),
    #[error("model file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Logreg,
    Dtree,
    Knn,
    Gnb,
    Rforest,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Logreg,
        ModelKind::Dtree,
        ModelKind::Knn,
        ModelKind::Gnb,
        ModelKind::Rforest,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ModelKind::Logreg => "logreg",
            ModelKind::Dtree => "dtree",
            ModelKind::Knn => "knn",
            ModelKind::Gnb => "gnb",
            ModelKind::Rforest => "rforest",
        }
    }

    /// Human-readable name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Logreg => "Logistic Regression",
            ModelKind::Dtree => "Decision Tree",
            ModelKind::Knn => "K Nearest Neighbor",
            ModelKind::Gnb => "Gaussian Naive Bayes",
            ModelKind::Rforest => "Random Forest",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.key() == s.trim())
            .ok_or_else(|| ModelError::UnknownKind(s.trim().to_string()))
    }
}

/// Kind-specific hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Hyperparams {
    Logreg(LogRegParams),
    Dtree(TreeParams),
    Knn(KnnParams),
    Gnb(GnbParams),
    Rforest(ForestParams),
}

impl Hyperparams {
    pub fn kind(&self) -> ModelKind {
        match self {
            Hyperparams::Logreg(_) => ModelKind::Logreg,
            Hyperparams::Dtree(_) => ModelKind::Dtree,
            Hyperparams::Knn(_) => ModelKind::Knn,
            Hyperparams::Gnb(_) => ModelKind::Gnb,
            Hyperparams::Rforest(_) => ModelKind::Rforest,
        }
    }

    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Logreg => Hyperparams::Logreg(LogRegParams::default()),
            ModelKind::Dtree => Hyperparams::Dtree(TreeParams::default()),
            ModelKind::Knn => Hyperparams::Knn(KnnParams::default()),
            ModelKind::Gnb => Hyperparams::Gnb(GnbParams::default()),
            ModelKind::Rforest => Hyperparams::Rforest(ForestParams::default()),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::BadHyperparameter(m.to_string()));
        match self {
            Hyperparams::Logreg(p) => {
                if !(p.l2 > 0.0 && p.l2.is_finite()) {
                    return bad("logreg l2 must be > 0");
                }
                if p.max_iter == 0 {
                    return bad("logreg max_iter must be >= 1");
                }
                if p.tol.is_nan() || p.tol <= 0.0 {
                    return bad("logreg tol must be > 0");
                }
            }
            Hyperparams::Dtree(p) => p.validate()?,
            Hyperparams::Knn(p) => {
                if p.k == 0 {
                    return bad("knn k must be >= 1");
                }
            }
            Hyperparams::Gnb(p) => {
                if !(p.var_smoothing >= 0.0 && p.var_smoothing.is_finite()) {
                    return bad("gnb var_smoothing must be >= 0");
                }
            }
            Hyperparams::Rforest(p) => {
                if p.n_trees == 0 {
                    return bad("rforest n_trees must be >= 1");
                }
                if p.max_features == Some(0) {
                    return bad("rforest max_features must be >= 1");
                }
                p.tree.validate()?;
            }
        }
        Ok(())
    }
}

/// What to train: a kind with its hyperparameters and a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub params: Hyperparams,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        ModelSpec {
            params: Hyperparams::default_for(kind),
            seed,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }
}

/// Training-set shape and fit statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub n_rows: usize,
    pub n_features: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum Fitted {
    Logreg(LogisticModel),
    Dtree(DecisionTree),
    Knn(KnnModel),
    Gnb(GaussianNb),
    Rforest(RandomForest),
}

/// A fitted classifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedModel {
    pub meta: TrainingMeta,
    pub fitted: Fitted,
}

/// Identifies the JSON model format written by [`TrainedModel::to_json`].
pub const MODEL_FORMAT: &str = "reweigh-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope<M> {
    format: String,
    version: u32,
    model: M,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self.fitted {
            Fitted::Logreg(_) => ModelKind::Logreg,
            Fitted::Dtree(_) => ModelKind::Dtree,
            Fitted::Knn(_) => ModelKind::Knn,
            Fitted::Gnb(_) => ModelKind::Gnb,
            Fitted::Rforest(_) => ModelKind::Rforest,
        }
    }

    pub fn n_features(&self) -> usize {
        self.meta.n_features
    }

    /// Serializes as versioned JSON. Reals are written with round-trip
    /// precision so a reloaded model predicts identically.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&Envelope {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_FORMAT_VERSION,
            model: self,
        })
        .expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let env: Envelope<TrainedModel> = serde_json::from_str(s).map_err(|e| ModelError::Format(e.to_string()))?;
        if env.format != MODEL_FORMAT {
            return Err(ModelError::Format(format!("unexpected format `{}`", env.format)));
        }
        if env.version != MODEL_FORMAT_VERSION {
            return Err(ModelError::Format(format!("unsupported version {}", env.version)));
        }
        Ok(env.model)
    }
}

/// Fits `spec` on `train`, honoring per-row weights as described in the
/// module docs.
pub fn train(spec: &ModelSpec, train: &Dataset) -> Result<TrainedModel, ModelError> {
    spec.params.validate()?;
    let n = train.len();
    if n < 2 {
        return Err(ModelError::TooFewRows(n));
    }
    let labels = train.labels();
    if !(labels.contains(&0) && labels.contains(&1)) {
        return Err(ModelError::SingleClass);
    }
    let x = train.features().view();
    let w = train.weights();
    let mut meta = TrainingMeta {
        n_rows: n,
        n_features: train.n_features(),
        iterations: None,
        n_nodes: None,
        depth: None,
    };
    let fitted = match &spec.params {
        Hyperparams::Logreg(p) => {
            let m = LogisticModel::fit(p, x, labels, w);
            meta.iterations = Some(m.iterations());
            Fitted::Logreg(m)
        }
        Hyperparams::Dtree(p) => {
            let t = DecisionTree::fit(p, x, labels, w);
            meta.n_nodes = Some(t.n_nodes());
            meta.depth = Some(t.depth());
            Fitted::Dtree(t)
        }
        Hyperparams::Knn(p) => Fitted::Knn(KnnModel::fit(p, x, labels)),
        Hyperparams::Gnb(p) => Fitted::Gnb(GaussianNb::fit(p, x, labels, w)),
        Hyperparams::Rforest(p) => {
            let f = RandomForest::fit(p, x, labels, w, spec.seed);
            meta.n_nodes = Some(f.n_nodes());
            Fitted::Rforest(f)
        }
    };
    Ok(TrainedModel { meta, fitted })
}

/// Estimated probability of the favorable class for every row.
pub fn predict_scores(model: &TrainedModel, features: &Array2<f64>) -> Result<Vec<f64>, ModelError> {
    predict_scores_view(model, features.view())
}

pub fn predict_scores_view(model: &TrainedModel, x: ArrayView2<f64>) -> Result<Vec<f64>, ModelError> {
    if x.ncols() != model.n_features() {
        return Err(ModelError::DimensionMismatch {
            expected: model.n_features(),
            found: x.ncols(),
        });
    }
    let scores = match &model.fitted {
        Fitted::Logreg(m) => m.scores(x),
        Fitted::Dtree(m) => m.scores(x),
        Fitted::Knn(m) => m.scores(x),
        Fitted::Gnb(m) => m.scores(x),
        Fitted::Rforest(m) => m.scores(x),
    };
    debug_assert!(scores.iter().all(|s| (0.0..=1.0).contains(s)));
    Ok(scores)
}

/// Label 1 wherever the score reaches `threshold` (ties are favorable).
pub fn labels_from_scores(scores: &[f64], threshold: f64) -> Result<Vec<u8>, ModelError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ModelError::BadThreshold(threshold));
    }
    Ok(scores.iter().map(|&s| u8::from(s >= threshold)).collect())
}

pub fn predict_labels(model: &TrainedModel, features: &Array2<f64>, threshold: f64) -> Result<Vec<u8>, ModelError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ModelError::BadThreshold(threshold));
    }
    labels_from_scores(&predict_scores(model, features)?, threshold)
}
