//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments start with '#'
//! dataset = adult            # adult | compas
//! protected = race           # race | sex
//! models = logreg, dtree, knn, gnb, rforest
//! seed = 42
//! test_fraction = 0.3
//! evaluation_split = test    # test | train
//! grid = 0, 0.25, 0.5        # or `default` for 0.00..=1.00 step 0.01
//! data_dir = data
//! ```
//!
//! Every key is optional and falls back to the value shown, except `grid`,
//! which is unset unless given (no sweep). Unknown keys are rejected.

use crate::classifiers::{ModelKind, ModelSpec};
use crate::tabular::{DatasetName, ProtectedAttr, DEFAULT_SEED, DEFAULT_TEST_FRACTION};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {message}")]
    BadValue { line: usize, key: String, message: String },
    #[error("unknown model kind `{0}` (expected logreg, dtree, knn, gnb or rforest)")]
    UnknownModel(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Which split the trained models are evaluated on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalSplit {
    #[default]
    Test,
    Train,
}

impl fmt::Display for EvalSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalSplit::Test => "test",
            EvalSplit::Train => "train",
        })
    }
}

impl FromStr for EvalSplit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "test" => Ok(EvalSplit::Test),
            "train" => Ok(EvalSplit::Train),
            other => Err(format!("unknown evaluation split `{other}` (expected test or train)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetName,
    pub protected: ProtectedAttr,
    pub models: Vec<ModelSpec>,
    pub test_fraction: f64,
    pub seed: u64,
    pub evaluation_split: EvalSplit,
    /// Sweep thresholds; no sweep is run when absent.
    pub threshold_grid: Option<Vec<f64>>,
    pub data_dir: PathBuf,
}

impl Default for ExperimentConfig {
    /// Adult/race, all five models, 70/30 split with seed 42, held-out
    /// evaluation, no sweep.
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetName::Adult,
            protected: ProtectedAttr::Race,
            models: ModelKind::ALL
                .iter()
                .map(|&k| ModelSpec::new(k, DEFAULT_SEED))
                .collect(),
            test_fraction: DEFAULT_TEST_FRACTION,
            seed: DEFAULT_SEED,
            evaluation_split: EvalSplit::Test,
            threshold_grid: None,
            data_dir: PathBuf::from("data"),
        }
    }
}

/// Parses `default` or a comma-separated list of thresholds. The result is
/// validated: values in [0, 1] and strictly increasing.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    let grid = if s == "default" {
        super::default_grid()
    } else {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("`{}` is not a number", t.trim()))
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    check_grid(&grid)?;
    Ok(grid)
}

fn check_grid(grid: &[f64]) -> Result<(), String> {
    if grid.is_empty() {
        return Err("grid is empty".into());
    }
    if let Some(t) = grid.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(format!("threshold {t} outside [0, 1]"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err("thresholds must be strictly increasing".into());
    }
    Ok(())
}

/// Parses a comma-separated model list; every model gets `seed`.
pub fn parse_models(s: &str, seed: u64) -> Result<Vec<ModelSpec>, ConfigError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            ModelKind::from_str(t)
                .map(|k| ModelSpec::new(k, seed))
                .map_err(|_| ConfigError::UnknownModel(t.to_string()))
        })
        .collect()
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: Vec<String> = Vec::new();
        let mut models: Option<(usize, String)> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
            seen.push(key.to_string());
            let bad = |message: String| ConfigError::BadValue {
                line,
                key: key.to_string(),
                message,
            };
            match key {
                "dataset" => cfg.dataset = value.parse().map_err(bad)?,
                "protected" => {
                    cfg.protected = value
                        .parse()
                        .map_err(|e: crate::tabular::DataError| bad(e.to_string()))?
                }
                "models" => models = Some((line, value.to_string())),
                "seed" => cfg.seed = value.parse().map_err(|_| bad(format!("`{value}` is not an integer")))?,
                "test_fraction" => {
                    cfg.test_fraction = value.parse().map_err(|_| bad(format!("`{value}` is not a number")))?
                }
                "evaluation_split" => cfg.evaluation_split = value.parse().map_err(bad)?,
                "grid" => cfg.threshold_grid = Some(parse_grid(value).map_err(bad)?),
                "data_dir" => cfg.data_dir = PathBuf::from(value),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }
        // models pick up the seed regardless of key order
        let models_line = models.as_ref().map(|(l, _)| *l);
        cfg.models = match models {
            Some((_, list)) => parse_models(&list, cfg.seed)?,
            None => ModelKind::ALL.iter().map(|&k| ModelSpec::new(k, cfg.seed)).collect(),
        };
        cfg.validate().map_err(|e| match (e, models_line) {
            (ConfigError::Invalid(m), Some(line)) if m.contains("models") => ConfigError::BadValue {
                line,
                key: "models".into(),
                message: m,
            },
            (e, _) => e,
        })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.models.is_empty() {
            return Err(ConfigError::Invalid("models list is empty".into()));
        }
        let mut kinds: Vec<ModelKind> = self.models.iter().map(ModelSpec::kind).collect();
        kinds.sort();
        if kinds.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError::Invalid("models list repeats a kind".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "test_fraction {} outside (0, 1)",
                self.test_fraction
            )));
        }
        if let Some(grid) = &self.threshold_grid {
            check_grid(grid).map_err(ConfigError::Invalid)?;
        }
        for m in &self.models {
            m.params.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok(())
    }

    /// The configured grid, or thresholds 0.00..=1.00 in steps of 0.01.
    pub fn grid_or_default(&self) -> Vec<f64> {
        self.threshold_grid.clone().unwrap_or_else(super::default_grid)
    }

    /// Renders the configuration in the format accepted by [`Self::parse`].
    pub fn to_text(&self) -> String {
        let models: Vec<&str> = self.models.iter().map(|m| m.kind().key()).collect();
        let mut s = format!(
            "dataset = {}\nprotected = {}\nmodels = {}\nseed = {}\ntest_fraction = {}\nevaluation_split = {}\n",
            self.dataset,
            self.protected,
            models.join(", "),
            self.seed,
            self.test_fraction,
            self.evaluation_split
        );
        if let Some(grid) = &self.threshold_grid {
            let g: Vec<String> = grid.iter().map(|t| t.to_string()).collect();
            s.push_str(&format!("grid = {}\n", g.join(", ")));
        }
        s.push_str(&format!("data_dir = {}\n", self.data_dir.display()));
        s
    }
}
