//! Report files: `report.md`, `report.csv`, `report.json` and one
//! `sweep_<model>_<phase>.csv` per sweep series.
//!
//! Markdown renders reals with four decimals and infinity as `∞`. CSV and
//! JSON carry full round-trip precision and write infinity as `inf`.
//! Missing sweep values are empty CSV cells and JSON `null`.

use super::{HarnessError, Phase, RunResult, SweepSeries, DEFAULT_THRESHOLD};
use crate::metrics::{format_value, Metric};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Json];
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

/// Run context recorded in `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub dataset: String,
    pub protected: String,
    pub seed: u64,
    pub test_fraction: f64,
    pub evaluation_split: String,
}

impl From<&super::ExperimentConfig> for ReportMeta {
    fn from(c: &super::ExperimentConfig) -> Self {
        ReportMeta {
            dataset: c.dataset.to_string(),
            protected: c.protected.to_string(),
            seed: c.seed,
            test_fraction: c.test_fraction,
            evaluation_split: c.evaluation_split.to_string(),
        }
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    #[serde(flatten)]
    meta: &'a ReportMeta,
    threshold: f64,
    results: &'a [RunResult],
    sweeps: &'a [SweepSeries],
}

fn full(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".into()
    } else {
        v.to_string()
    }
}

fn markdown_value(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "∞".into()
    } else {
        format_value(v)
    }
}

/// Before rows first, then after rows, each in the given model order.
fn phase_ordered(results: &[RunResult]) -> Vec<&RunResult> {
    [Phase::Before, Phase::After]
        .iter()
        .flat_map(|&p| results.iter().filter(move |r| r.phase == p))
        .collect()
}

pub fn render_markdown(results: &[RunResult]) -> String {
    let mut s = String::from("| Model | Phase |");
    for m in Metric::ALL {
        let _ = write!(s, " {m} |");
    }
    s.push_str("\n|---|---|");
    s.push_str(&"---:|".repeat(Metric::ALL.len()));
    s.push('\n');
    for r in phase_ordered(results) {
        let _ = write!(s, "| {} | {} |", r.model.display_name(), r.phase);
        for m in Metric::ALL {
            let _ = write!(s, " {} |", markdown_value(r.report.get(m)));
        }
        s.push('\n');
    }
    s
}

pub fn render_csv(results: &[RunResult]) -> String {
    let mut s = String::from("model,phase");
    for m in Metric::ALL {
        let _ = write!(s, ",{}", m.key());
    }
    s.push('\n');
    for r in results {
        let _ = write!(s, "{},{}", r.model, r.phase);
        for m in Metric::ALL {
            let _ = write!(s, ",{}", full(r.report.get(m)));
        }
        s.push('\n');
    }
    s
}

pub fn render_sweep_csv(series: &SweepSeries) -> String {
    let mut s = String::from("threshold");
    for m in Metric::ALL {
        let _ = write!(s, ",{}", m.key());
    }
    s.push('\n');
    for p in &series.points {
        let _ = write!(s, "{}", p.threshold);
        for m in Metric::ALL {
            match p.metrics.get(m) {
                Some(v) => {
                    let _ = write!(s, ",{}", full(v));
                }
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}

pub fn render_json(meta: &ReportMeta, results: &[RunResult], series: &[SweepSeries]) -> String {
    let mut s = serde_json::to_string_pretty(&JsonReport {
        meta,
        threshold: DEFAULT_THRESHOLD,
        results,
        sweeps: series,
    })
    .expect("report serializes");
    s.push('\n');
    s
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, HarnessError> {
    std::fs::write(&path, contents).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes the requested formats into `out_dir` (created if missing) and
/// returns the paths written. Sweep CSVs accompany the CSV format.
pub fn emit_report(
    meta: &ReportMeta,
    results: &[RunResult],
    series: &[SweepSeries],
    formats: &[ReportFormat],
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>, HarnessError> {
    let out = out_dir.as_ref();
    std::fs::create_dir_all(out).map_err(|source| HarnessError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for f in ReportFormat::ALL.into_iter().filter(|f| formats.contains(f)) {
        match f {
            ReportFormat::Markdown => written.push(write(out.join("report.md"), &render_markdown(results))?),
            ReportFormat::Json => written.push(write(out.join("report.json"), &render_json(meta, results, series))?),
            ReportFormat::Csv => {
                written.push(write(out.join("report.csv"), &render_csv(results))?);
                for s in series {
                    let name = format!("sweep_{}_{}.csv", s.model, s.phase);
                    written.push(write(out.join(name), &render_sweep_csv(s))?);
                }
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::ModelKind;
    use crate::harness::SweepPoint;
    use crate::metrics::{FairnessReport, PartialReport};

    fn report(di: f64) -> FairnessReport {
        FairnessReport {
            ba: 0.73904,
            spd: -0.1,
            aod: 0.05,
            di,
            eod: 0.0,
            ti: 0.125,
        }
    }

    fn results() -> Vec<RunResult> {
        let mut v = Vec::new();
        for model in [ModelKind::Logreg, ModelKind::Knn] {
            for phase in [Phase::Before, Phase::After] {
                v.push(RunResult {
                    model,
                    phase,
                    report: report(if phase == Phase::After { f64::INFINITY } else { 0.5 }),
                });
            }
        }
        v
    }

    fn meta() -> ReportMeta {
        ReportMeta {
            dataset: "adult".into(),
            protected: "race".into(),
            seed: 42,
            test_fraction: 0.3,
            evaluation_split: "test".into(),
        }
    }

    #[test]
    fn csv_shape_and_inf() {
        let csv = render_csv(&results());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines.iter().all(|l| l.split(',').count() == 8));
        assert_eq!(lines[0], "model,phase,ba,spd,aod,di,eod,ti");
        assert_eq!(lines[2], "logreg,after,0.73904,-0.1,0.05,inf,0,0.125");
    }

    #[test]
    fn markdown_groups_phases() {
        let md = render_markdown(&results());
        let rows: Vec<&str> = md.lines().skip(2).collect();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].starts_with("| Logistic Regression | before | 0.7390 |"));
        assert!(rows[1].starts_with("| K Nearest Neighbor | before |"));
        assert!(rows[2].contains("| after |") && rows[2].contains("| ∞ |"));
    }

    #[test]
    fn json_with_empty_sweeps() {
        let v: serde_json::Value = serde_json::from_str(&render_json(&meta(), &results(), &[])).unwrap();
        assert_eq!(v["seed"], 42);
        assert_eq!(v["sweeps"], serde_json::json!([]));
        assert_eq!(v["results"][1]["report"]["di"], "inf");
        let back: Vec<RunResult> = serde_json::from_value(v["results"].clone()).unwrap();
        assert_eq!(back, results());
    }

    #[test]
    fn sweep_csv_missing_cells() {
        let s = SweepSeries {
            model: ModelKind::Gnb,
            phase: Phase::After,
            points: vec![SweepPoint {
                threshold: 1.0,
                metrics: PartialReport {
                    ba: Some(0.5),
                    ..Default::default()
                },
            }],
        };
        assert_eq!(render_sweep_csv(&s), "threshold,ba,spd,aod,di,eod,ti\n1,0.5,,,,,\n");
    }

    #[test]
    fn emit_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let s = SweepSeries {
            model: ModelKind::Knn,
            phase: Phase::Before,
            points: vec![],
        };
        let paths = emit_report(&meta(), &results(), &[s], &ReportFormat::ALL, dir.path()).unwrap();
        let names: Vec<String> = paths
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            names,
            ["report.md", "report.csv", "sweep_knn_before.csv", "report.json"]
        );
    }
}
