//! Reweighing-based bias mitigation for tabular binary classification.
//!
//! The crate covers the whole pipeline: loading and encoding the Adult and
//! COMPAS tables ([`tabular`]), computing per-row reweighing coefficients
//! ([`reweighing`]), five weight-aware classifiers ([`classifiers`]),
//! balanced accuracy and group fairness metrics ([`metrics`]), and
//! before/after experiments with report output ([`harness`]).
//!
//! ```
//! use reweigh_core::{count_groups, reweighing, synthesize, SyntheticSpec};
//!
//! let ds = synthesize(&SyntheticSpec {
//!     n_total: 200,
//!     privileged_fraction: 0.5,
//!     positive_rate_privileged: 0.7,
//!     positive_rate_unprivileged: 0.3,
//!     feature_dim: 2,
//!     class_separation: 1.0,
//!     seed: 7,
//! })
//! .unwrap();
//! let weighted = reweighing::apply(&ds).unwrap();
//! let mass: f64 = weighted.weights().iter().sum();
//! assert!((mass - count_groups(&ds).n_total as f64).abs() < 1e-9);
//! ```

pub mod classifiers;
pub mod harness;
pub mod metrics;
pub mod reweighing;
pub mod tabular;

pub use ndarray::{Array2, ArrayView2};

pub use classifiers::{
    labels_from_scores, predict_labels, predict_scores, train, Hyperparams, ModelError, ModelKind, ModelSpec,
    TrainedModel,
};
pub use harness::{
    emit_report, naive_oracle, run_all, run_experiment, threshold_sweep, EvalSplit, ExperimentConfig, HarnessError,
    Phase, ReportFormat, ReportMeta, RunResult, SweepPoint, SweepSeries,
};
pub use metrics::{full_report, FairnessReport, Metric, MetricError, PartialReport};
pub use reweighing::{compute_weights, FourWeights, ReweighError};
pub use tabular::{
    count_groups, load_csv, load_prepared, split, synthesize, DataError, Dataset, DatasetName, GroupCounts,
    ProtectedAttr, RawTable, SyntheticSpec,
};
