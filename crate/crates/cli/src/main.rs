//! `reweigh`: fetch and prepare the Adult and COMPAS tables, reweigh a
//! dataset, audit predictions, and run before/after experiments.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 runtime error (training, metrics, network, file output).

mod fetch;

use clap::{Args, Parser, Subcommand};
use reweigh_core::harness::{self, ConfigError, EvalSplit, ExperimentConfig, HarnessError, ReportFormat, ReportMeta};
use reweigh_core::metrics::{self, format_value, Metric};
use reweigh_core::tabular::{self, read_dataset_csv, read_predictions_csv, write_dataset_csv};
use reweigh_core::{count_groups, load_prepared, reweighing, DataError, DatasetName, ModelKind, ProtectedAttr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) => CliError::Usage(e.to_string()),
            HarnessError::Data(_) | HarnessError::Reweigh(_) => CliError::Data(e.to_string()),
            HarnessError::Train { .. } | HarnessError::Metric { .. } | HarnessError::Io { .. } => {
                CliError::Runtime(e.to_string())
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "reweigh",
    version,
    about = "Reweighing bias mitigation experiments and fairness audits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Download a dataset and verify its pinned checksums
    Fetch(FetchArgs),
    /// Encode a fetched dataset into the CSV-with-weights format
    Prepare(PrepareArgs),
    /// Apply reweighing to a dataset CSV
    Reweigh(ReweighArgs),
    /// Compute the fairness report for a predictions CSV
    Audit(AuditArgs),
    /// Train every model before and after reweighing and write reports
    Run(ExperimentArgs),
    /// Like `run`, and also sweep the decision threshold (default grid 0.00..=1.00 step 0.01)
    Sweep(ExperimentArgs),
}

#[derive(Debug, Args)]
struct FetchArgs {
    /// Dataset to download: adult or compas
    #[arg(long)]
    dataset: DatasetName,
    /// Directory receiving <out>/<dataset>/
    #[arg(long, default_value = "data")]
    out: PathBuf,
    /// Manifest listing URLs and sha256 digests [default: built-in manifest]
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PrepareArgs {
    /// Dataset to encode: adult or compas
    #[arg(long)]
    dataset: DatasetName,
    /// Protected attribute: race or sex
    #[arg(long, default_value = "race")]
    protected: ProtectedAttr,
    /// Directory holding the fetched files
    #[arg(long, default_value = "data")]
    data_dir: PathBuf,
    /// Output directory; writes <dataset>-<protected>.csv
    #[arg(long, default_value = "prepared")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReweighArgs {
    /// Dataset CSV (feature columns, then label, protected, weight)
    input: PathBuf,
    /// Output directory; writes reweighed.csv
    #[arg(long, default_value = "reweighed")]
    out: PathBuf,
    /// Print the four coefficients as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct AuditArgs {
    /// Predictions CSV with header pred,label,protected[,weight]
    input: PathBuf,
    /// Print the report as JSON instead of a table
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Flat key = value configuration file; flags below override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// adult or compas [default: adult]
    #[arg(long)]
    dataset: Option<DatasetName>,
    /// race or sex [default: race]
    #[arg(long)]
    protected: Option<ProtectedAttr>,
    /// Comma-separated model kinds [default: logreg,dtree,knn,gnb,rforest]
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<ModelKind>>,
    /// Seed for the split and the random forest [default: 42]
    #[arg(long)]
    seed: Option<u64>,
    /// Held-out fraction [default: 0.3]
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Evaluation split: test or train [default: test]
    #[arg(long)]
    eval_split: Option<EvalSplit>,
    /// Threshold grid: `default` or comma-separated values in [0, 1] [default: none for run, `default` for sweep]
    #[arg(long)]
    grid: Option<String>,
    /// Directory holding the fetched files [default: data]
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Output directory for report files
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Print report.json to standard output instead of the markdown table
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Fetch(a) => cmd_fetch(a),
        Command::Prepare(a) => cmd_prepare(a),
        Command::Reweigh(a) => cmd_reweigh(a),
        Command::Audit(a) => cmd_audit(a),
        Command::Run(a) => cmd_experiment(a, false),
        Command::Sweep(a) => cmd_experiment(a, true),
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn cmd_fetch(a: FetchArgs) -> Result<(), CliError> {
    let text = match &a.manifest {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", p.display())))?,
        None => fetch::BUILTIN_MANIFEST.to_string(),
    };
    let manifest = fetch::parse_manifest(&text)?;
    fetch::fetch(a.dataset, &a.out, &manifest)?;
    Ok(())
}

fn cmd_prepare(a: PrepareArgs) -> Result<(), CliError> {
    let ds = load_prepared(&a.data_dir, a.dataset, a.protected)?;
    create_dir(&a.out)?;
    let path = a.out.join(format!("{}-{}.csv", a.dataset, a.protected));
    write_dataset_csv(&ds, &path)?;
    let c = count_groups(&ds);
    println!(
        "{}: {} rows, {} features; privileged {} (favorable {}), unprivileged {} (favorable {})",
        path.display(),
        ds.len(),
        ds.n_features(),
        c.n_p,
        c.n_pp,
        c.n_up,
        c.n_pup
    );
    Ok(())
}

fn cmd_reweigh(a: ReweighArgs) -> Result<(), CliError> {
    let ds = read_dataset_csv(&a.input)?;
    let counts = count_groups(&ds);
    let coeffs = reweighing::compute_weights(&counts).map_err(|e| CliError::Data(e.to_string()))?;
    let out = reweighing::apply(&ds).map_err(|e| CliError::Data(e.to_string()))?;
    create_dir(&a.out)?;
    let path = a.out.join("reweighed.csv");
    write_dataset_csv(&out, &path)?;
    if a.json {
        println!("{}", serde_json::to_string(&coeffs).expect("weights serialize"));
    } else {
        println!("cell   count  weight");
        for (name, n, w) in [
            ("w_pp", counts.n_pp, coeffs.w_pp),
            ("w_pup", counts.n_pup, coeffs.w_pup),
            ("w_np", counts.n_np, coeffs.w_np),
            ("w_nup", counts.n_nup, coeffs.w_nup),
        ] {
            println!("{name:<6} {n:>5}  {w:.6}");
        }
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_audit(a: AuditArgs) -> Result<(), CliError> {
    let p = read_predictions_csv(&a.input)?;
    let report = metrics::full_report(&p.preds, &p.labels, &p.protected, &p.weights)
        .map_err(|e| CliError::Data(e.to_string()))?;
    if a.json {
        println!("{}", report.to_json());
    } else {
        for m in Metric::ALL {
            println!("{:<4} {}", m.to_string(), format_value(report.get(m)));
        }
    }
    Ok(())
}

fn experiment_config(a: &ExperimentArgs, sweep: bool) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(d) = a.dataset {
        cfg.dataset = d;
    }
    if let Some(p) = a.protected {
        cfg.protected = p;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(models) = &a.models {
        cfg.models = models
            .iter()
            .map(|&k| reweigh_core::ModelSpec::new(k, cfg.seed))
            .collect();
    }
    for m in &mut cfg.models {
        m.seed = cfg.seed;
    }
    if let Some(f) = a.test_fraction {
        cfg.test_fraction = f;
    }
    if let Some(e) = a.eval_split {
        cfg.evaluation_split = e;
    }
    if let Some(g) = &a.grid {
        cfg.threshold_grid = Some(harness::parse_grid(g).map_err(|e| CliError::Usage(format!("--grid: {e}")))?);
    }
    if sweep && cfg.threshold_grid.is_none() {
        cfg.threshold_grid = Some(harness::default_grid());
    }
    if let Some(d) = &a.data_dir {
        cfg.data_dir = d.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_experiment(a: ExperimentArgs, sweep: bool) -> Result<(), CliError> {
    let cfg = experiment_config(&a, sweep)?;
    let ds = tabular::load_prepared(&cfg.data_dir, cfg.dataset, cfg.protected)?;
    let (results, series) = harness::run_all(&cfg, &ds)?;
    let meta = ReportMeta::from(&cfg);
    let written = harness::emit_report(&meta, &results, &series, &ReportFormat::ALL, &a.out)?;
    if a.json {
        print!("{}", harness::report::render_json(&meta, &results, &series));
    } else {
        print!("{}", harness::report::render_markdown(&results));
    }
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}
