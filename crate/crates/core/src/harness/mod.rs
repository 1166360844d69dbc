//! Before/after reweighing experiments: train every configured model on the
//! original and on the reweighed training split, evaluate both on the same
//! evaluation split with unit weights, and collect metric reports and
//! threshold sweeps.

mod config;
mod oracle;
pub mod report;

pub use config::{parse_grid, parse_models, ConfigError, EvalSplit, ExperimentConfig};
pub use oracle::naive_oracle;
pub use report::{emit_report, ReportFormat, ReportMeta};

use crate::classifiers::{self, labels_from_scores, ModelError, ModelKind, ModelSpec};
use crate::metrics::{self, FairnessReport, MetricError, PartialReport};
use crate::reweighing::{self, ReweighError};
use crate::tabular::{self, DataError, Dataset, Standardizer};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Decision threshold used for the main before/after table.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Before,
    After,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Before => "before",
            Phase::After => "after",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("reweighing the training split: {0}")]
    Reweigh(#[source] ReweighError),
    #[error("{model}/{phase}: training failed: {source}")]
    Train {
        model: ModelKind,
        phase: Phase,
        #[source]
        source: ModelError,
    },
    #[error("{model}/{phase}: {source}")]
    Metric {
        model: ModelKind,
        phase: Phase,
        #[source]
        source: MetricError,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub model: ModelKind,
    pub phase: Phase,
    pub report: FairnessReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub threshold: f64,
    pub metrics: PartialReport,
}

/// Metrics of one trained model across a threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub model: ModelKind,
    pub phase: Phase,
    pub points: Vec<SweepPoint>,
}

/// One trained (model, phase) cell with its evaluation-split scores.
#[derive(Debug, Clone)]
pub struct ScoredCell {
    pub model: ModelKind,
    pub phase: Phase,
    pub scores: Vec<f64>,
}

/// Evaluation rows shared by every cell.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub labels: Vec<u8>,
    pub protected: Vec<u8>,
    pub weights: Vec<f64>,
}

/// Training splits after standardization.
#[derive(Debug, Clone)]
pub struct Splits {
    pub train: Dataset,
    pub reweighed: Dataset,
    pub eval: Dataset,
}

/// Splits, standardizes with training statistics and reweighs the training
/// split. The evaluation part carries unit weights.
pub fn prepare_splits(cfg: &ExperimentConfig, ds: &Dataset) -> Result<Splits, HarnessError> {
    let (train, test) = tabular::split(ds, cfg.test_fraction, cfg.seed)?;
    let scaler = Standardizer::fit(&train);
    let train = scaler.transform(&train);
    let eval = match cfg.evaluation_split {
        EvalSplit::Test => scaler.transform(&test),
        EvalSplit::Train => train.clone(),
    }
    .with_unit_weights();
    let reweighed = reweighing::apply(&train).map_err(HarnessError::Reweigh)?;
    Ok(Splits { train, reweighed, eval })
}

fn sorted_models(cfg: &ExperimentConfig) -> Vec<&ModelSpec> {
    let mut models: Vec<&ModelSpec> = cfg.models.iter().collect();
    models.sort_by_key(|m| m.kind());
    models
}

/// Trains every (model, phase) cell and scores the evaluation split.
/// Cells come back sorted by model kind, then phase.
pub fn score_cells(cfg: &ExperimentConfig, ds: &Dataset) -> Result<(Evaluation, Vec<ScoredCell>), HarnessError> {
    let splits = prepare_splits(cfg, ds)?;
    let mut cells = Vec::new();
    for spec in sorted_models(cfg) {
        for (phase, data) in [(Phase::Before, &splits.train), (Phase::After, &splits.reweighed)] {
            let model = spec.kind();
            let fitted =
                classifiers::train(spec, data).map_err(|source| HarnessError::Train { model, phase, source })?;
            let scores = classifiers::predict_scores(&fitted, splits.eval.features())
                .map_err(|source| HarnessError::Train { model, phase, source })?;
            cells.push(ScoredCell { model, phase, scores });
        }
    }
    let eval = Evaluation {
        labels: splits.eval.labels().to_vec(),
        protected: splits.eval.protected().to_vec(),
        weights: splits.eval.weights().to_vec(),
    };
    Ok((eval, cells))
}

fn report_at(eval: &Evaluation, cell: &ScoredCell, threshold: f64) -> Result<FairnessReport, HarnessError> {
    let preds = labels_from_scores(&cell.scores, threshold).map_err(|source| HarnessError::Train {
        model: cell.model,
        phase: cell.phase,
        source,
    })?;
    metrics::full_report(&preds, &eval.labels, &eval.protected, &eval.weights).map_err(|source| HarnessError::Metric {
        model: cell.model,
        phase: cell.phase,
        source,
    })
}

fn results_from(eval: &Evaluation, cells: &[ScoredCell]) -> Result<Vec<RunResult>, HarnessError> {
    cells
        .iter()
        .map(|c| {
            Ok(RunResult {
                model: c.model,
                phase: c.phase,
                report: report_at(eval, c, DEFAULT_THRESHOLD)?,
            })
        })
        .collect()
}

fn sweeps_from(eval: &Evaluation, cells: &[ScoredCell], grid: &[f64]) -> Result<Vec<SweepSeries>, HarnessError> {
    cells
        .iter()
        .map(|c| {
            let points = grid
                .iter()
                .map(|&t| {
                    let err = |source| HarnessError::Train {
                        model: c.model,
                        phase: c.phase,
                        source,
                    };
                    let preds = labels_from_scores(&c.scores, t).map_err(err)?;
                    let metrics = metrics::partial_report(&preds, &eval.labels, &eval.protected, &eval.weights)
                        .map_err(|source| HarnessError::Metric {
                            model: c.model,
                            phase: c.phase,
                            source,
                        })?;
                    Ok(SweepPoint { threshold: t, metrics })
                })
                .collect::<Result<Vec<_>, HarnessError>>()?;
            Ok(SweepSeries {
                model: c.model,
                phase: c.phase,
                points,
            })
        })
        .collect()
}

/// Before/after reports at threshold 0.5, sorted by model kind then phase.
pub fn run_experiment(cfg: &ExperimentConfig, ds: &Dataset) -> Result<Vec<RunResult>, HarnessError> {
    let (eval, cells) = score_cells(cfg, ds)?;
    results_from(&eval, &cells)
}

/// Metrics at every threshold of the configured grid (or the default
/// 0.00..=1.00 step 0.01 grid), reusing one trained model per cell.
/// Metrics that are undefined at a threshold are left empty.
pub fn threshold_sweep(cfg: &ExperimentConfig, ds: &Dataset) -> Result<Vec<SweepSeries>, HarnessError> {
    let grid = cfg.grid_or_default();
    let (eval, cells) = score_cells(cfg, ds)?;
    sweeps_from(&eval, &cells, &grid)
}

/// [`run_experiment`] and, when a grid is configured, [`threshold_sweep`],
/// sharing the trained models.
pub fn run_all(cfg: &ExperimentConfig, ds: &Dataset) -> Result<(Vec<RunResult>, Vec<SweepSeries>), HarnessError> {
    let (eval, cells) = score_cells(cfg, ds)?;
    let results = results_from(&eval, &cells)?;
    let sweeps = match &cfg.threshold_grid {
        Some(grid) => sweeps_from(&eval, &cells, grid)?,
        None => Vec::new(),
    };
    Ok((results, sweeps))
}

/// Thresholds 0.00, 0.01, ..., 1.00.
pub fn default_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 100.0).collect()
}
