//! Command-line front end: `synth`, `run`, `predict` and `heatmap-export`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 solver non-convergence.

pub mod config;
pub mod io;
pub mod model;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::analysis::{nesting_overlap, rejection_region, selection_frequency, standardized_submatrix};
use crate::analysis::{NestingReport, RejectionReport, StabilityReport};
use crate::pipeline::{
    dataset_tau_max, stage1_grid_search, stage2_sweep, sweep_fold_supports, CvResult, ErrorRecord, GridSpec,
    SweepMode,
};
use crate::random::SeededRng;
use crate::synth::{
    as_classification, generate_grouped_toy, generate_toy_regression, GroupedToySpec, ToyRegressionSpec,
    REFERENCE_TOY_WEIGHTS,
};
use crate::{make_folds, make_stratified_folds, Dataset, FoldPlan, TaskKind};
use config::{load_json, resolve_sweep, ExperimentConfig, FoldCount, MuValue};
use io::{format_labels, format_matrix, read_labels, read_matrix, to_json, write_file};
use model::ModelFile;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Data(_) => 2,
            CliError::NonConvergence(_) => 3,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        use crate::Error as E;
        match e {
            E::InvalidParameter(_) | E::IllPosed => CliError::Config(e.to_string()),
            E::Divergence { .. } | E::NoAdmissibleHyperparameters => CliError::NonConvergence(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "l1l2", version, about = "Two-stage elastic-net feature selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic dataset with its ground truth and a run config.
    Synth(SynthArgs),
    /// Stage I grid search followed by the Stage II μ sweep.
    Run(RunArgs),
    /// Score a matrix with a saved model.
    Predict(PredictArgs),
    /// Standardized support-restricted matrix, rows by decreasing |weight|.
    HeatmapExport(PredictArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Cascade,
    Independent,
}

impl From<ModeArg> for SweepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Cascade => SweepMode::Cascade,
            ModeArg::Independent => SweepMode::Independent,
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fold count, or `loo`.
    #[arg(long)]
    pub folds: Option<FoldCount>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Comma list; entries may be absolute or `<factor>tau`.
    #[arg(long, value_delimiter = ',')]
    pub mu_sweep: Option<Vec<MuValue>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to the available cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

impl CommonArgs {
    fn ignore_for(&self, command: &str, folds_mode_sweep: bool) {
        if folds_mode_sweep && (self.folds.is_some() || self.mode.is_some() || self.mu_sweep.is_some()) {
            eprintln!("warning: --folds, --mode and --mu-sweep have no effect on {command}");
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    ToyRegression,
    GroupedToy,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(value_enum)]
    pub kind: Option<SynthKind>,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Response noise standard deviation.
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Replace responses by their sign.
    #[arg(long)]
    pub classification: bool,
    /// Use the fixed reference weights in the regression toy.
    #[arg(long)]
    pub pinned_weights: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub kind: Option<SynthKind>,
    pub seed: u64,
    pub classification: bool,
    pub pinned_weights: bool,
    /// Training samples.
    pub n: Option<usize>,
    /// Held-out samples (regression toy only).
    pub n_test: Option<usize>,
    /// Feature count (regression toy only).
    pub p: Option<usize>,
    pub noise_sigma: Option<f64>,
    pub within_group_noise_sigma: Option<f64>,
    pub group_size: Option<usize>,
    pub n_noise_features: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    /// Training matrix.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub label_column: Option<String>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub test_labels: Option<PathBuf>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Classification,
    Regression,
}

impl From<TaskArg> for TaskKind {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Classification => TaskKind::Classification,
            TaskArg::Regression => TaskKind::Regression,
        }
    }
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Model file written by `run`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Matrix to score, columns matched by feature id.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictConfig {
    pub model: Option<PathBuf>,
    pub matrix: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    run_cli(std::env::args_os())
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Synth(a) => cmd_synth(a),
        Command::Run(a) => {
            let cfg = run_config(a)?;
            cmd_run(&cfg).map(|_| ())
        }
        Command::Predict(a) => cmd_predict(a),
        Command::HeatmapExport(a) => cmd_heatmap_export(a),
    }
}

fn config_base(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn cwd() -> PathBuf {
    std::env::current_dir().unwrap_or_default()
}

/// Merges the config file (if any) with flag overrides; paths given on the
/// command line are relative to the working directory, paths in the file to
/// the file's directory.
pub fn run_config(a: RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &a.common.config {
        Some(path) => {
            let mut c: ExperimentConfig = load_json(path)?;
            c.resolve_paths(&config_base(path));
            if let Some(out) = &c.out {
                if out.is_relative() {
                    c.out = Some(config_base(path).join(out));
                }
            }
            c
        }
        None => {
            let task = a.task.ok_or_else(|| CliError::Usage("--task is required without --config".into()))?;
            let train = a
                .train
                .clone()
                .ok_or_else(|| CliError::Usage("--train is required without --config".into()))?;
            ExperimentConfig::new(task.into(), train)
        }
    };
    if let Some(t) = a.task {
        cfg.task = t.into();
    }
    if let Some(p) = a.train {
        cfg.train = p;
    }
    if a.labels.is_some() {
        cfg.labels = a.labels;
        cfg.label_column = None;
    }
    if a.label_column.is_some() {
        cfg.label_column = a.label_column;
        cfg.labels = None;
    }
    if a.test.is_some() {
        cfg.test = a.test;
        cfg.test_fraction = None;
    }
    if a.test_labels.is_some() {
        cfg.test_labels = a.test_labels;
    }
    if a.test_fraction.is_some() {
        cfg.test_fraction = a.test_fraction;
        cfg.test = None;
        cfg.test_labels = None;
    }
    let c = a.common;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(f) = c.folds {
        cfg.folds = f;
    }
    if let Some(m) = c.mode {
        cfg.mode = m.into();
    }
    if let Some(m) = c.mu_sweep {
        cfg.mu_sweep = m;
    }
    if c.out.is_some() {
        cfg.out = c.out;
    }
    if c.workers.is_some() {
        cfg.workers = c.workers;
    }
    cfg.resolve_paths(&cwd());
    cfg.validate()?;
    Ok(cfg)
}

fn load_dataset(
    matrix: &Path,
    labels: Option<&Path>,
    label_column: Option<&str>,
    task: TaskKind,
) -> Result<Dataset, CliError> {
    let mut m = read_matrix(matrix)?;
    let y = match (labels, label_column) {
        (Some(path), _) => io::align_labels(path, &read_labels(path)?, &m.sample_ids)?,
        (None, Some(col)) => m
            .take_column(col)
            .ok_or_else(|| CliError::Data(format!("{}: no column named '{col}'", matrix.display())))?,
        (None, None) => return Err(CliError::Config("no labels given".into())),
    };
    Dataset::with_sample_ids(m.values, y, m.feature_ids, m.sample_ids, task)
        .map_err(|e| CliError::Data(format!("{}: {e}", matrix.display())))
}

/// Train and test sets, the latter either from files or from a seeded
/// split (test indices are the first `round(f·n)` of a shuffle).
fn load_split(cfg: &ExperimentConfig, split_seed: u64) -> Result<(Dataset, Option<Dataset>), CliError> {
    let full = load_dataset(&cfg.train, cfg.labels.as_deref(), cfg.label_column.as_deref(), cfg.task)?;
    if let Some(test_path) = &cfg.test {
        let mut m = read_matrix(test_path)?;
        let y = match (&cfg.test_labels, &cfg.label_column) {
            (Some(p), _) => io::align_labels(p, &read_labels(p)?, &m.sample_ids)?,
            (None, Some(col)) => m
                .take_column(col)
                .ok_or_else(|| CliError::Data(format!("{}: no column named '{col}'", test_path.display())))?,
            _ => unreachable!("validated"),
        };
        let x = m.align_columns(full.feature_ids(), true)?;
        let test = Dataset::with_sample_ids(x, y, full.feature_ids().to_vec(), m.sample_ids, cfg.task)
            .map_err(|e| CliError::Data(format!("{}: {e}", test_path.display())))?;
        return Ok((full, Some(test)));
    }
    let Some(fraction) = cfg.test_fraction else {
        return Ok((full, None));
    };
    let n = full.n_samples();
    let n_test = ((fraction * n as f64).round() as usize).max(1);
    if n_test + 2 > n {
        return Err(CliError::Config(format!("test_fraction {fraction} leaves too few training samples")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    SeededRng::new(split_seed).shuffle(&mut order);
    let mut test_idx = order[..n_test].to_vec();
    let mut train_idx = order[n_test..].to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((full.subset(&train_idx), Some(full.subset(&test_idx))))
}

#[derive(Serialize)]
struct FoldsReport<'a> {
    k: usize,
    leave_one_out: bool,
    stratified: bool,
    assignments: &'a [usize],
}

#[derive(Serialize)]
struct CvReport<'a> {
    tau_max: f64,
    folds: FoldsReport<'a>,
    #[serde(flatten)]
    result: &'a CvResult,
}

#[derive(Serialize)]
struct SweepEntry {
    mu: f64,
    mu_spec: MuValue,
    cardinality: usize,
    support: Vec<String>,
    converged: bool,
    iterations: usize,
    kkt_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    test_error: Option<ErrorRecord>,
    model: String,
}

#[derive(Serialize)]
struct SweepReport {
    tau_opt: f64,
    lambda_opt: f64,
    mode: SweepMode,
    entries: Vec<SweepEntry>,
}

#[derive(Serialize)]
struct StabilityEntry {
    mu: f64,
    #[serde(flatten)]
    report: StabilityReport,
}

#[derive(Serialize)]
struct RejectionEntry {
    mu: f64,
    scored_on: &'static str,
    #[serde(flatten)]
    report: RejectionReport,
}

#[derive(Serialize)]
struct SplitReport<'a> {
    train: &'a [String],
    test: &'a [String],
}

#[derive(Serialize)]
struct DerivedSeeds {
    split_seed: u64,
    fold_seed: u64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    derived_seeds: DerivedSeeds,
    outputs: Vec<String>,
    #[serde(flatten)]
    config: &'a ExperimentConfig,
}

/// Summary returned by [`cmd_run`].
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub out: PathBuf,
    pub tau_opt: f64,
    pub lambda_opt: f64,
    pub mu_values: Vec<f64>,
    pub cardinalities: Vec<usize>,
    pub all_converged: bool,
}

pub fn model_file_name(index: usize) -> String {
    format!("models/mu_{index:02}.json")
}

/// Runs the experiment described by `cfg` on a dedicated worker pool and
/// writes all reports under `cfg.out`. Reports are written even when a solve
/// at the chosen optimum failed to converge; that case then returns
/// [`CliError::NonConvergence`].
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("an output directory is required (--out)".into()))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_experiment(cfg, &out))
}

fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    let mut seeds = SeededRng::new(cfg.seed);
    let split_seed = seeds.next_u64();
    let fold_seed = seeds.next_u64();
    let (train, test) = load_split(cfg, split_seed)?;
    let n = train.n_samples();
    let k = cfg.folds.resolve(n);
    if k < 2 || k > n {
        return Err(CliError::Config(format!("{k} folds requested for {n} training samples")));
    }
    let folds: FoldPlan = if cfg.stratified {
        if cfg.task != TaskKind::Classification {
            return Err(CliError::Config("stratified folds need a classification task".into()));
        }
        make_stratified_folds(train.responses(), k, fold_seed)?
    } else {
        make_folds(n, k, fold_seed)?
    };
    let tau_max = dataset_tau_max(&train)?;
    let grid = cfg.grid.build(tau_max)?;
    let iteration = cfg.solver.build()?;

    let cv = stage1_grid_search(&train, &grid, &folds, &iteration)?;
    let sweep_spec = resolve_sweep(&cfg.mu_sweep, cv.tau_opt, grid.mu_stage1)?;
    let mus: Vec<f64> = sweep_spec.iter().map(|s| s.0).collect();
    let grid2 = GridSpec {
        mu_sweep: mus.clone(),
        ..grid
    };
    let sweep = stage2_sweep(&train, test.as_ref(), &cv, &grid2, &iteration, cfg.mode)?;
    let fold_supports = sweep_fold_supports(&train, &folds, cv.tau_opt, &mus, cfg.mode, &iteration)?;

    let ids = train.feature_ids();
    let mut files: Vec<(String, String)> = Vec::new();
    files.push((
        "cv.json".into(),
        to_json(&CvReport {
            tau_max,
            folds: FoldsReport {
                k,
                leave_one_out: folds.is_leave_one_out(),
                stratified: cfg.stratified,
                assignments: folds.assignments(),
            },
            result: &cv,
        }),
    ));
    let mut entries = Vec::with_capacity(mus.len());
    for (i, m) in sweep.models.iter().enumerate() {
        let d = sweep.diagnostics[i];
        entries.push(SweepEntry {
            mu: mus[i],
            mu_spec: sweep_spec[i].1,
            cardinality: m.cardinality(),
            support: m.support().iter().map(|&j| ids[j].clone()).collect(),
            converged: d.converged,
            iterations: d.iterations,
            kkt_residual: d.kkt_residual,
            test_error: sweep.test_errors.as_ref().map(|t| t[i].clone()),
            model: model_file_name(i),
        });
        files.push((model_file_name(i), to_json(&ModelFile::from_model(m, ids, cfg.task))));
    }
    files.push((
        "sweep.json".into(),
        to_json(&SweepReport {
            tau_opt: cv.tau_opt,
            lambda_opt: cv.lambda_opt,
            mode: cfg.mode,
            entries,
        }),
    ));
    let supports = sweep.supports();
    let nesting = match &sweep.nesting {
        Some(r) => r.clone(),
        None if supports.len() >= 2 => nesting_overlap(&supports)?,
        None => NestingReport {
            cardinalities: supports.iter().map(Vec::len).collect(),
            overlap_percent: Vec::new(),
        },
    };
    files.push(("nesting.json".into(), to_json(&nesting)));
    let stability = fold_supports
        .iter()
        .zip(&mus)
        .map(|(s, &mu)| {
            Ok(StabilityEntry {
                mu,
                report: selection_frequency(s, train.n_features())?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    files.push(("stability.json".into(), to_json(&stability)));
    if cfg.task == TaskKind::Classification {
        let (scored, scored_on) = match &test {
            Some(t) => (t, "test"),
            None => (&train, "train"),
        };
        let rejection = sweep
            .models
            .iter()
            .zip(&mus)
            .map(|(m, &mu)| {
                let scores = m.predict_many(scored.samples())?;
                Ok(RejectionEntry {
                    mu,
                    scored_on,
                    report: rejection_region(scores.view(), scored.responses())?,
                })
            })
            .collect::<Result<Vec<_>, crate::Error>>()?;
        files.push(("rejection.json".into(), to_json(&rejection)));
    }
    if cfg.test_fraction.is_some() {
        let test_ids = test.as_ref().map_or(&[][..], |t| t.sample_ids());
        files.push((
            "split.json".into(),
            to_json(&SplitReport {
                train: train.sample_ids(),
                test: test_ids,
            }),
        ));
    }
    let mut outputs: Vec<String> = files.iter().map(|f| f.0.clone()).collect();
    outputs.push("manifest.json".into());
    files.push((
        "manifest.json".into(),
        to_json(&Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            derived_seeds: DerivedSeeds { split_seed, fold_seed },
            outputs,
            config: cfg,
        }),
    ));
    for (name, text) in &files {
        write_file(&out.join(name), text)?;
    }

    let stage1_ok = cv.converged[cv.tau_index].iter().all(|&c| c);
    let summary = RunSummary {
        out: out.to_path_buf(),
        tau_opt: cv.tau_opt,
        lambda_opt: cv.lambda_opt,
        mu_values: mus,
        cardinalities: supports.iter().map(Vec::len).collect(),
        all_converged: stage1_ok && sweep.all_converged(),
    };
    println!(
        "tau_opt = {}, lambda_opt = {}, selected per mu: {:?}; reports in {}",
        summary.tau_opt,
        summary.lambda_opt,
        summary.cardinalities,
        out.display()
    );
    if !stage1_ok {
        return Err(CliError::NonConvergence(format!(
            "Stage I solve at tau = {} did not converge in every fold",
            cv.tau_opt
        )));
    }
    if let Some(i) = sweep.diagnostics.iter().position(|d| !d.converged) {
        let d = sweep.diagnostics[i];
        return Err(CliError::NonConvergence(format!(
            "Stage II solve at mu = {} stopped after {} iterations with KKT residual {:e}",
            summary.mu_values[i], d.iterations, d.kkt_residual
        )));
    }
    Ok(summary)
}

fn synth_config(a: &SynthArgs) -> Result<SynthConfig, CliError> {
    let mut cfg = match &a.common.config {
        Some(path) => {
            let mut c: SynthConfig = load_json(path)?;
            if let Some(out) = &c.out {
                if out.is_relative() {
                    c.out = Some(config_base(path).join(out));
                }
            }
            c
        }
        None => SynthConfig::default(),
    };
    if a.kind.is_some() {
        cfg.kind = a.kind;
    }
    if let Some(s) = a.common.seed {
        cfg.seed = s;
    }
    if a.noise_sigma.is_some() {
        cfg.noise_sigma = a.noise_sigma;
    }
    cfg.classification |= a.classification;
    cfg.pinned_weights |= a.pinned_weights;
    if a.common.out.is_some() {
        cfg.out = a.common.out.clone();
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct ToyTruth {
    kind: SynthKind,
    seed: u64,
    noise_sigma: f64,
    weights: Vec<(String, f64)>,
}

#[derive(Serialize)]
struct GroupedTruth {
    kind: SynthKind,
    seed: u64,
    within_group_noise_sigma: f64,
    response_noise_sigma: f64,
    /// Feature ids of each correlated group.
    groups: Vec<Vec<String>>,
    /// 1-based column ranges of the groups.
    group_ranges: Vec<(usize, usize)>,
    noise_features: Vec<String>,
}

/// Writes `matrix.tsv`, `labels.tsv`, `truth.json` and a ready-to-run
/// `config.json` (plus `test_matrix.tsv` / `test_labels.tsv` for the
/// regression toy's validation set) into the output directory.
pub fn cmd_synth(a: SynthArgs) -> Result<(), CliError> {
    a.common.ignore_for("synth", true);
    let cfg = synth_config(&a)?;
    let kind = cfg
        .kind
        .ok_or_else(|| CliError::Usage("choose a generator: toy-regression or grouped-toy".into()))?;
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("an output directory is required (--out)".into()))?;
    let task = if cfg.classification {
        TaskKind::Classification
    } else {
        TaskKind::Regression
    };
    let finish = |d: Dataset| if cfg.classification { as_classification(&d) } else { Ok(d) };
    let mut run = ExperimentConfig::new(task, "matrix.tsv".into());
    run.labels = Some("labels.tsv".into());
    run.seed = cfg.seed;
    match kind {
        SynthKind::ToyRegression => {
            let d = ToyRegressionSpec::default();
            let spec = ToyRegressionSpec {
                n_train: cfg.n.unwrap_or(d.n_train),
                n_validation: cfg.n_test.unwrap_or(d.n_validation),
                p: cfg.p.unwrap_or(d.p),
                true_weights: cfg.pinned_weights.then_some(REFERENCE_TOY_WEIGHTS),
                noise_sigma: cfg.noise_sigma.unwrap_or(d.noise_sigma),
                input_range: d.input_range,
                seed: cfg.seed,
            };
            let toy = generate_toy_regression(&spec)?;
            let train = finish(toy.train)?;
            let validation = finish(toy.validation)?;
            write_dataset(&out, "", &train)?;
            write_dataset(&out, "test_", &validation)?;
            let ids = train.feature_ids();
            let truth = ToyTruth {
                kind,
                seed: cfg.seed,
                noise_sigma: spec.noise_sigma,
                weights: toy
                    .truth
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w != 0.0)
                    .map(|(j, &w)| (ids[j].clone(), w))
                    .collect(),
            };
            write_file(&out.join("truth.json"), &to_json(&truth))?;
            run.test = Some("test_matrix.tsv".into());
            run.test_labels = Some("test_labels.tsv".into());
        }
        SynthKind::GroupedToy => {
            let d = GroupedToySpec::default();
            let spec = GroupedToySpec {
                n: cfg.n.unwrap_or(d.n),
                within_group_noise_sigma: cfg.within_group_noise_sigma.unwrap_or(d.within_group_noise_sigma),
                group_size: cfg.group_size.unwrap_or(d.group_size),
                n_noise_features: cfg.n_noise_features.unwrap_or(d.n_noise_features),
                response_noise_sigma: cfg.noise_sigma.unwrap_or(d.response_noise_sigma),
                seed: cfg.seed,
            };
            let toy = generate_grouped_toy(&spec)?;
            let data = finish(toy.data)?;
            write_dataset(&out, "", &data)?;
            let ids = data.feature_ids();
            let truth = GroupedTruth {
                kind,
                seed: cfg.seed,
                within_group_noise_sigma: spec.within_group_noise_sigma,
                response_noise_sigma: spec.response_noise_sigma,
                groups: toy
                    .relevant_groups
                    .iter()
                    .map(|g| g.iter().map(|&j| ids[j].clone()).collect())
                    .collect(),
                group_ranges: toy
                    .relevant_groups
                    .iter()
                    .map(|g| (g[0] + 1, g[g.len() - 1] + 1))
                    .collect(),
                noise_features: toy.noise_features.iter().map(|&j| ids[j].clone()).collect(),
            };
            write_file(&out.join("truth.json"), &to_json(&truth))?;
            run.mu_sweep.push(MuValue::TauMultiple(1000.0));
        }
    }
    write_file(&out.join("config.json"), &to_json(&run))?;
    println!("wrote {kind:?} data to {}", out.display());
    Ok(())
}

fn write_dataset(dir: &Path, prefix: &str, d: &Dataset) -> Result<(), CliError> {
    let x = d.samples().to_owned();
    write_file(
        &dir.join(format!("{prefix}matrix.tsv")),
        &format_matrix("sample", d.sample_ids(), d.feature_ids(), &x),
    )?;
    let header = match d.task() {
        TaskKind::Classification => ("sample", "label"),
        TaskKind::Regression => ("sample", "response"),
    };
    let y: Vec<f64> = d.responses().to_vec();
    write_file(&dir.join(format!("{prefix}labels.tsv")), &format_labels(header, d.sample_ids(), &y))
}

fn predict_config(a: &PredictArgs, command: &str) -> Result<(PathBuf, PathBuf, Option<PathBuf>), CliError> {
    a.common.ignore_for(command, true);
    let mut cfg = match &a.common.config {
        Some(path) => {
            let mut c: PredictConfig = load_json(path)?;
            let base = config_base(path);
            for p in [&mut c.model, &mut c.matrix, &mut c.out].into_iter().flatten() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
            c
        }
        None => PredictConfig::default(),
    };
    if a.model.is_some() {
        cfg.model = a.model.clone();
    }
    if a.matrix.is_some() {
        cfg.matrix = a.matrix.clone();
    }
    if a.common.out.is_some() {
        cfg.out = a.common.out.clone();
    }
    let model = cfg.model.ok_or_else(|| CliError::Usage("--model is required".into()))?;
    let matrix = cfg.matrix.ok_or_else(|| CliError::Usage("--matrix is required".into()))?;
    for p in [&model, &matrix] {
        if !p.is_file() {
            return Err(CliError::Config(format!("input file not found: {}", p.display())));
        }
    }
    Ok((model, matrix, cfg.out))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Per-sample scores; classification models add the sign label.
pub fn predict_text(model: &ModelFile, matrix: &io::Matrix) -> Result<String, CliError> {
    let x = matrix.align_columns(&model.feature_ids, true)?;
    let scores: Array1<f64> = model.to_model()?.predict_many(x.view())?;
    let mut s = String::from("sample\tscore");
    if model.task == TaskKind::Classification {
        s.push_str("\tlabel");
    }
    s.push('\n');
    for (id, &v) in matrix.sample_ids.iter().zip(scores.iter()) {
        s.push_str(&format!("{id}\t{v}"));
        if model.task == TaskKind::Classification {
            s.push_str(&format!("\t{}", crate::data::sign_label(v)));
        }
        s.push('\n');
    }
    Ok(s)
}

pub fn cmd_predict(a: PredictArgs) -> Result<(), CliError> {
    let (model_path, matrix_path, out) = predict_config(&a, "predict")?;
    let model: ModelFile = load_json(&model_path)?;
    let matrix = read_matrix(&matrix_path)?;
    emit(out.as_deref(), &predict_text(&model, &matrix)?)
}

/// Support rows by decreasing |weight|, each standardized across samples.
pub fn heatmap_text(model: &ModelFile, matrix: &io::Matrix) -> Result<String, CliError> {
    let rows = model.support_by_magnitude();
    if rows.is_empty() {
        return Err(CliError::Data("the model has an empty support; nothing to export".into()));
    }
    let ids: Vec<String> = rows.iter().map(|r| r.feature.clone()).collect();
    let x = matrix.align_columns(&ids, false)?;
    let mut out = Array2::zeros((ids.len(), x.nrows()));
    for (r, id) in ids.iter().enumerate() {
        let row = standardized_submatrix(x.view(), &[r])
            .map_err(|_| CliError::Data(format!("zero variance feature '{id}' cannot be standardized")))?;
        out.row_mut(r).assign(&row.index_axis(Axis(0), 0));
    }
    Ok(format_matrix("feature", &ids, &matrix.sample_ids, &out))
}

pub fn cmd_heatmap_export(a: PredictArgs) -> Result<(), CliError> {
    let (model_path, matrix_path, out) = predict_config(&a, "heatmap-export")?;
    let model: ModelFile = load_json(&model_path)?;
    let matrix = read_matrix(&matrix_path)?;
    emit(out.as_deref(), &heatmap_text(&model, &matrix)?)
}
