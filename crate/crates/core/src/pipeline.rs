//! The two-stage protocol.
//!
//! Stage I: for every (τ, λ) on a grid and every fold, fit on the remaining
//! folds at a small fixed μ (elastic net, then ridge on the selected support)
//! and score on the held-out fold. The pair with the lowest mean validation
//! error wins, subject to the selection rule.
//!
//! Stage II: keep (τ_opt, λ_opt) and sweep μ upward on the full training set,
//! producing a family of debiased models whose supports grow with μ.
//!
//! Fold work is spread over the ambient rayon pool; results are always
//! reduced in grid order so outputs do not depend on the worker count.

use ndarray::{Array1, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{nesting_overlap, NestingReport};
use crate::data::{sign_label, CenteredData, Dataset, FoldPlan, HyperParams, LinearModel, TaskKind};
use crate::error::{dim_mismatch, Error, Result};
use crate::solver::{
    cascade_path, elastic_net_solve, estimate_step_bound, geometric_schedule, ridge_solve, tau_max,
    IterationConfig, SolveReport,
};

/// How the elastic-net stage reaches a small target μ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStrategy {
    /// One solve at the target μ.
    Direct,
    /// Warm-started cascade over `steps` geometric values from `start_mu`
    /// down to the target, each restricted to the previous support. Falls
    /// back to a direct solve when the target is 0 or not below `start_mu`.
    Cascade { start_mu: f64, steps: usize },
}

impl SolveStrategy {
    /// 10⁻³ down to the target in ten steps.
    pub fn default_cascade() -> Self {
        SolveStrategy::Cascade {
            start_mu: 1e-3,
            steps: 10,
        }
    }

    fn schedule(&self, mu: f64) -> Option<Vec<f64>> {
        match *self {
            SolveStrategy::Cascade { start_mu, steps } if mu > 0.0 && mu < start_mu && steps >= 2 => {
                Some(geometric_schedule(start_mu, mu, steps))
            }
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMetric {
    /// Number of misclassified samples (sign of the score vs ±1 label).
    Misclassification,
    MeanSquaredError,
}

impl ErrorMetric {
    pub fn default_for(task: TaskKind) -> Self {
        match task {
            TaskKind::Classification => ErrorMetric::Misclassification,
            TaskKind::Regression => ErrorMetric::MeanSquaredError,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// Lowest mean error; ties go to the largest τ, then the smallest λ.
    Minimum,
    /// Among points within one standard error of the minimum, the largest τ,
    /// then the smallest λ.
    OneStandardError,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Each μ is solved on the support of the next larger μ; nesting is exact.
    Cascade,
    /// Each μ is solved from scratch on all features.
    Independent,
}

/// Search grids for Stage I and the μ sweep for Stage II.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Strictly decreasing, positive.
    pub tau_values: Vec<f64>,
    pub lambda_values: Vec<f64>,
    pub mu_stage1: f64,
    /// Strictly increasing; starts at `mu_stage1` or 0.
    pub mu_sweep: Vec<f64>,
    pub stage1_strategy: SolveStrategy,
    pub selection: SelectionRule,
    /// Task default when absent.
    pub metric: Option<ErrorMetric>,
}

pub const DEFAULT_TAU_COUNT: usize = 30;
pub const DEFAULT_TAU_MIN_RATIO: f64 = 1e-4;
pub const DEFAULT_LAMBDA_COUNT: usize = 10;
pub const DEFAULT_LAMBDA_RANGE: (f64, f64) = (1e-8, 1e2);
pub const DEFAULT_MU_STAGE1: f64 = 1e-6;

/// `count` geometric values from `tau_max` down to `min_ratio · tau_max`.
pub fn tau_grid(tau_max: f64, count: usize, min_ratio: f64) -> Vec<f64> {
    geometric_schedule(tau_max, tau_max * min_ratio, count)
}

/// `count` geometric values from `low` up to `high`.
pub fn lambda_grid(low: f64, high: f64, count: usize) -> Vec<f64> {
    let mut v = geometric_schedule(high, low, count);
    v.reverse();
    v
}

/// 0 followed by 8 geometric values in `[10⁻⁶, 10⁻³]`.
pub fn default_mu_sweep() -> Vec<f64> {
    let mut v = vec![0.0];
    v.extend(lambda_grid(1e-6, 1e-3, 8));
    v
}

/// `max_j |(2/n)(XᵀY)_j|` after centering the dataset.
pub fn dataset_tau_max(data: &Dataset) -> Result<f64> {
    let c = CenteredData::from_dataset(data)?;
    Ok(tau_max(c.x.view(), c.y.view()))
}

impl GridSpec {
    /// Default grids anchored at the τ_max of `train`.
    pub fn default_for(train: &Dataset) -> Result<Self> {
        let tmax = dataset_tau_max(train)?;
        if !(tmax > 0.0) {
            return Err(Error::DegenerateDesign);
        }
        Ok(Self {
            tau_values: tau_grid(tmax, DEFAULT_TAU_COUNT, DEFAULT_TAU_MIN_RATIO),
            lambda_values: lambda_grid(DEFAULT_LAMBDA_RANGE.0, DEFAULT_LAMBDA_RANGE.1, DEFAULT_LAMBDA_COUNT),
            mu_stage1: DEFAULT_MU_STAGE1,
            mu_sweep: default_mu_sweep(),
            stage1_strategy: SolveStrategy::default_cascade(),
            selection: SelectionRule::OneStandardError,
            metric: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if self.tau_values.is_empty() || self.tau_values.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return bad("tau values must be nonempty, finite and positive");
        }
        if self.tau_values.windows(2).any(|w| w[1] >= w[0]) {
            return bad("tau values must be strictly decreasing");
        }
        if self.lambda_values.is_empty() || self.lambda_values.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
            return bad("lambda values must be nonempty, finite and >= 0");
        }
        if !(self.mu_stage1 >= 0.0 && self.mu_stage1.is_finite()) {
            return bad("mu_stage1 must be finite and >= 0");
        }
        if self.mu_sweep.is_empty() || self.mu_sweep.iter().any(|&m| !(m >= 0.0 && m.is_finite())) {
            return bad("mu sweep must be nonempty, finite and >= 0");
        }
        if self.mu_sweep.windows(2).any(|w| w[1] <= w[0]) {
            return bad("mu sweep must be strictly increasing");
        }
        if self.mu_sweep[0] != self.mu_stage1 && self.mu_sweep[0] != 0.0 {
            return bad("mu sweep must start at mu_stage1 or 0");
        }
        if let SolveStrategy::Cascade { start_mu, .. } = self.stage1_strategy {
            if !(start_mu > 0.0 && start_mu.is_finite()) {
                return bad("cascade start mu must be positive");
            }
        }
        Ok(())
    }

    fn metric_for(&self, task: TaskKind) -> ErrorMetric {
        self.metric.unwrap_or_else(|| ErrorMetric::default_for(task))
    }
}

/// Test-set error of one model.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorRecord {
    Classification {
        /// +1-labelled samples predicted −1.
        positive_errors: usize,
        /// −1-labelled samples predicted +1.
        negative_errors: usize,
        n_positive: usize,
        n_negative: usize,
    },
    Regression {
        mean_squared_error: f64,
        n: usize,
    },
}

impl ErrorRecord {
    /// Misclassification count, or the mean-square error for regression.
    pub fn value(&self) -> f64 {
        match *self {
            ErrorRecord::Classification {
                positive_errors,
                negative_errors,
                ..
            } => (positive_errors + negative_errors) as f64,
            ErrorRecord::Regression {
                mean_squared_error, ..
            } => mean_squared_error,
        }
    }
}

/// Per-class misclassification counts (sign of the score, zero counted as +1)
/// for classification data, mean-square error otherwise.
pub fn evaluate(model: &LinearModel, test: &Dataset) -> Result<ErrorRecord> {
    let scores = model.predict_many(test.samples())?;
    let y = test.responses();
    Ok(match test.task() {
        TaskKind::Classification => {
            let (mut pe, mut ne, mut np, mut nn) = (0, 0, 0, 0);
            for (&s, &label) in scores.iter().zip(y.iter()) {
                let wrong = sign_label(s) != label;
                if label > 0.0 {
                    np += 1;
                    pe += wrong as usize;
                } else {
                    nn += 1;
                    ne += wrong as usize;
                }
            }
            ErrorRecord::Classification {
                positive_errors: pe,
                negative_errors: ne,
                n_positive: np,
                n_negative: nn,
            }
        }
        TaskKind::Regression => {
            let n = y.len();
            let sse: f64 = scores.iter().zip(y.iter()).map(|(s, t)| (s - t).powi(2)).sum();
            ErrorRecord::Regression {
                mean_squared_error: if n == 0 { 0.0 } else { sse / n as f64 },
                n,
            }
        }
    })
}

/// Per-sample losses of `model` on `data` under `metric`.
fn sample_losses(model: &LinearModel, data: &Dataset, metric: ErrorMetric) -> Result<Vec<f64>> {
    let scores = model.predict_many(data.samples())?;
    Ok(scores
        .iter()
        .zip(data.responses().iter())
        .map(|(&s, &y)| match metric {
            ErrorMetric::Misclassification => (sign_label(s) != y) as u8 as f64,
            ErrorMetric::MeanSquaredError => (s - y).powi(2),
        })
        .collect())
}

/// Error of a model on a held-out set: misclassification count or mean square.
fn holdout_error(losses: &[f64], metric: ErrorMetric) -> f64 {
    let total: f64 = losses.iter().sum();
    match metric {
        ErrorMetric::Misclassification => total,
        ErrorMetric::MeanSquaredError => total / losses.len().max(1) as f64,
    }
}

/// Standard error of [`holdout_error`] estimated from the per-sample losses.
fn holdout_standard_error(losses: &[f64], metric: ErrorMetric) -> f64 {
    let n = losses.len();
    if n < 2 {
        return 0.0;
    }
    let sd = sample_sd(losses);
    match metric {
        ErrorMetric::Misclassification => sd * (n as f64).sqrt(),
        ErrorMetric::MeanSquaredError => sd / (n as f64).sqrt(),
    }
}

fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

fn check_task(train: &Dataset, other: &Dataset) -> Result<()> {
    if other.n_features() != train.n_features() {
        return Err(dim_mismatch("feature count", train.n_features(), other.n_features()));
    }
    Ok(())
}

/// Elastic-net stage on centered data for one (τ, μ), using `strategy`.
/// Returns the report whose solution defines the support, plus the first
/// stage's solution for warm-starting the next τ.
fn solve_elastic_net(
    centered: &CenteredData,
    tau: f64,
    mu: f64,
    strategy: &SolveStrategy,
    config: &IterationConfig,
) -> Result<(SolveReport, Array1<f64>)> {
    let x = centered.x.view();
    let y = centered.y.view();
    match strategy.schedule(mu) {
        Some(schedule) => {
            let path = cascade_path(x, y, tau, &schedule, config)?;
            let first = path[0].solution.clone();
            let converged = path.iter().all(|r| r.converged);
            let iterations = path.iter().map(|r| r.iterations).sum();
            let last = path.into_iter().last().expect("nonempty schedule");
            Ok((
                SolveReport {
                    converged,
                    iterations,
                    ..last
                },
                first,
            ))
        }
        None => {
            let params = HyperParams::new(tau, mu, 0.0)?;
            let report = elastic_net_solve(x, y, &params, config)?;
            let first = report.solution.clone();
            Ok((report, first))
        }
    }
}

/// Ridge refit of the selected support; the zero model when it is empty.
fn debias(
    centered: &CenteredData,
    report: &SolveReport,
    params: HyperParams,
) -> Result<LinearModel> {
    let support = report.support();
    if support.is_empty() {
        return Ok(LinearModel::zero(centered.transform.clone(), params));
    }
    let restricted = centered.x.select(Axis(1), &support);
    let refit = ridge_solve(restricted.view(), centered.y.view(), params.lambda)?;
    let mut weights = Array1::zeros(centered.n_features());
    for (k, &j) in support.iter().enumerate() {
        weights[j] = refit[k];
    }
    LinearModel::new(weights, centered.transform.clone(), params, report.converged)
}

fn elastic_net_model(centered: &CenteredData, report: &SolveReport, params: HyperParams) -> Result<LinearModel> {
    LinearModel::new(
        report.solution.clone(),
        centered.transform.clone(),
        params,
        report.converged,
    )
}

/// Two-stage fit: center, select with the elastic net (direct solve), refit
/// the support with ridge weight λ. An empty support gives the zero model; a
/// non-converged selection is returned with `converged() == false`.
pub fn train_classifier(train: &Dataset, params: HyperParams, config: &IterationConfig) -> Result<LinearModel> {
    train_classifier_with(train, params, config, &SolveStrategy::Direct)
}

pub fn train_classifier_with(
    train: &Dataset,
    params: HyperParams,
    config: &IterationConfig,
    strategy: &SolveStrategy,
) -> Result<LinearModel> {
    let centered = CenteredData::from_dataset(train)?;
    let (report, _) = solve_elastic_net(&centered, params.tau, params.mu, strategy, config)?;
    debias(&centered, &report, params)
}

/// Elastic-net stage only, without the ridge refit. `params.lambda` is unused.
pub fn fit_elastic_net(train: &Dataset, params: HyperParams, config: &IterationConfig) -> Result<LinearModel> {
    let centered = CenteredData::from_dataset(train)?;
    let (report, _) = solve_elastic_net(&centered, params.tau, params.mu, &SolveStrategy::Direct, config)?;
    elastic_net_model(&centered, &report, params)
}

/// Trains on the `k − 1` folds complementary to `fold`.
pub fn fold_model(
    train: &Dataset,
    folds: &FoldPlan,
    fold: usize,
    params: HyperParams,
    config: &IterationConfig,
    strategy: &SolveStrategy,
) -> Result<LinearModel> {
    let subset = train.subset(&folds.training_indices(fold));
    train_classifier_with(&subset, params, config, strategy)
}

/// Warm-started elastic-net solves along the (decreasing) τ grid.
fn tau_path(
    centered: &CenteredData,
    taus: &[f64],
    mu: f64,
    strategy: &SolveStrategy,
    config: &IterationConfig,
) -> Result<Vec<SolveReport>> {
    let step = match config.step_bound {
        Some(c) => c,
        None => estimate_step_bound(centered.x.view())?,
    };
    let mut warm: Option<Array1<f64>> = config.initial_point.clone();
    let mut reports = Vec::with_capacity(taus.len());
    for &tau in taus {
        let cfg = IterationConfig {
            step_bound: Some(step),
            initial_point: warm.take(),
            ..config.clone()
        };
        let (report, first) = solve_elastic_net(centered, tau, mu, strategy, &cfg)?;
        warm = Some(first);
        reports.push(report);
    }
    Ok(reports)
}

/// Loss of one grid point on one split, with its within-split standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
struct SplitLoss {
    value: f64,
    standard_error: f64,
}

struct SplitOutcome {
    /// `[t][l]`, `None` where the fit was inadmissible.
    losses: Vec<Vec<Option<SplitLoss>>>,
    /// `[t]`.
    supports: Vec<Vec<usize>>,
    converged: Vec<bool>,
}

fn run_split(
    train: &Dataset,
    validation: &Dataset,
    grid: &GridSpec,
    config: &IterationConfig,
    metric: ErrorMetric,
) -> Result<SplitOutcome> {
    let centered = CenteredData::from_dataset(train)?;
    let path = tau_path(
        &centered,
        &grid.tau_values,
        grid.mu_stage1,
        &grid.stage1_strategy,
        config,
    )?;
    let mut losses = Vec::with_capacity(path.len());
    let mut supports = Vec::with_capacity(path.len());
    let mut converged = Vec::with_capacity(path.len());
    for (report, &tau) in path.iter().zip(&grid.tau_values) {
        let mut row = Vec::with_capacity(grid.lambda_values.len());
        for &lambda in &grid.lambda_values {
            if !report.converged {
                row.push(None);
                continue;
            }
            let params = HyperParams::new(tau, grid.mu_stage1, lambda)?;
            match debias(&centered, report, params) {
                Ok(model) => {
                    let l = sample_losses(&model, validation, metric)?;
                    row.push(Some(SplitLoss {
                        value: holdout_error(&l, metric),
                        standard_error: holdout_standard_error(&l, metric),
                    }));
                }
                Err(Error::IllPosed) => row.push(None),
                Err(e) => return Err(e),
            }
        }
        losses.push(row);
        supports.push(report.support());
        converged.push(report.converged);
    }
    Ok(SplitOutcome {
        losses,
        supports,
        converged,
    })
}

/// Outcome of Stage I.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvResult {
    pub tau_values: Vec<f64>,
    pub lambda_values: Vec<f64>,
    pub mu: f64,
    pub metric: ErrorMetric,
    /// Mean validation error `[t][l]`; `None` when some split failed there.
    pub error_surface: Vec<Vec<Option<f64>>>,
    /// Standard error of each mean `[t][l]`.
    pub standard_errors: Vec<Vec<Option<f64>>>,
    /// Raw per-split errors `[t][l][i]`.
    pub split_errors: Vec<Vec<Vec<Option<f64>>>>,
    pub tau_index: usize,
    pub lambda_index: usize,
    pub tau_opt: f64,
    pub lambda_opt: f64,
    /// Elastic-net support `[t][i]` for every τ and split (independent of λ).
    pub per_fold_supports: Vec<Vec<Vec<usize>>>,
    /// Whether the selection step converged `[t][i]`.
    pub converged: Vec<Vec<bool>>,
}

impl CvResult {
    pub fn support(&self, tau_index: usize, split: usize) -> &[usize] {
        &self.per_fold_supports[tau_index][split]
    }

    /// Supports at the selected τ, one per split.
    pub fn optimal_supports(&self) -> &[Vec<usize>] {
        &self.per_fold_supports[self.tau_index]
    }

    pub fn min_error(&self) -> Option<f64> {
        self.error_surface
            .iter()
            .flatten()
            .flatten()
            .copied()
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))))
    }
}

/// Picks `(t, l)` under `rule`. Taus are strictly decreasing, so "largest τ"
/// is the smallest `t`.
fn select_optimum(
    means: &[Vec<Option<f64>>],
    ses: &[Vec<Option<f64>>],
    lambdas: &[f64],
    rule: SelectionRule,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (t, row) in means.iter().enumerate() {
        for (l, v) in row.iter().enumerate() {
            if let Some(v) = *v {
                if best.map_or(true, |(_, _, b)| v < b) {
                    best = Some((t, l, v));
                }
            }
        }
    }
    let (bt, bl, min) = best?;
    let threshold = match rule {
        SelectionRule::Minimum => min,
        SelectionRule::OneStandardError => min + ses[bt][bl].unwrap_or(0.0),
    };
    for (t, row) in means.iter().enumerate() {
        let chosen = row
            .iter()
            .enumerate()
            .filter(|(_, v)| v.map_or(false, |v| v <= threshold))
            .min_by(|a, b| lambdas[a.0].total_cmp(&lambdas[b.0]).then(a.0.cmp(&b.0)));
        if let Some((l, _)) = chosen {
            return Some((t, l));
        }
    }
    None
}

fn reduce_splits(
    grid: &GridSpec,
    metric: ErrorMetric,
    outcomes: Vec<SplitOutcome>,
    holdout: bool,
) -> Result<CvResult> {
    let nt = grid.tau_values.len();
    let nl = grid.lambda_values.len();
    let k = outcomes.len();
    let mut error_surface = vec![vec![None; nl]; nt];
    let mut standard_errors = vec![vec![None; nl]; nt];
    let mut split_errors = vec![vec![Vec::with_capacity(k); nl]; nt];
    for t in 0..nt {
        for l in 0..nl {
            let cell: Vec<Option<SplitLoss>> = outcomes.iter().map(|o| o.losses[t][l]).collect();
            split_errors[t][l] = cell.iter().map(|c| c.map(|s| s.value)).collect();
            if cell.iter().all(Option::is_some) {
                let values: Vec<f64> = cell.iter().map(|c| c.unwrap().value).collect();
                let mean = values.iter().sum::<f64>() / k as f64;
                let se = if holdout {
                    cell[0].unwrap().standard_error
                } else {
                    sample_sd(&values) / (k as f64).sqrt()
                };
                error_surface[t][l] = Some(mean);
                standard_errors[t][l] = Some(se);
            }
        }
    }
    let (tau_index, lambda_index) =
        select_optimum(&error_surface, &standard_errors, &grid.lambda_values, grid.selection)
            .ok_or(Error::NoAdmissibleHyperparameters)?;
    let per_fold_supports = (0..nt)
        .map(|t| outcomes.iter().map(|o| o.supports[t].clone()).collect())
        .collect();
    let converged = (0..nt)
        .map(|t| outcomes.iter().map(|o| o.converged[t]).collect())
        .collect();
    Ok(CvResult {
        tau_values: grid.tau_values.clone(),
        lambda_values: grid.lambda_values.clone(),
        mu: grid.mu_stage1,
        metric,
        error_surface,
        standard_errors,
        split_errors,
        tau_index,
        lambda_index,
        tau_opt: grid.tau_values[tau_index],
        lambda_opt: grid.lambda_values[lambda_index],
        per_fold_supports,
        converged,
    })
}

/// Stage I by k-fold cross-validation. Each fold is recentered on its own
/// training part; the held-out fold is scored with that transform.
pub fn stage1_grid_search(
    train: &Dataset,
    grid: &GridSpec,
    folds: &FoldPlan,
    config: &IterationConfig,
) -> Result<CvResult> {
    grid.validate()?;
    if folds.n_samples() != train.n_samples() {
        return Err(dim_mismatch("fold plan size", train.n_samples(), folds.n_samples()));
    }
    let metric = grid.metric_for(train.task());
    let outcomes = (0..folds.k())
        .into_par_iter()
        .map(|fold| {
            let fit = train.subset(&folds.training_indices(fold));
            let held = train.subset(&folds.validation_indices(fold));
            run_split(&fit, &held, grid, config, metric)
        })
        .collect::<Result<Vec<_>>>()?;
    reduce_splits(grid, metric, outcomes, false)
}

/// Stage I with a single fixed validation set. The standard error used by
/// [`SelectionRule::OneStandardError`] comes from the per-sample losses.
pub fn holdout_grid_search(
    train: &Dataset,
    validation: &Dataset,
    grid: &GridSpec,
    config: &IterationConfig,
) -> Result<CvResult> {
    grid.validate()?;
    check_task(train, validation)?;
    let metric = grid.metric_for(train.task());
    let outcome = run_split(train, validation, grid, config, metric)?;
    reduce_splits(grid, metric, vec![outcome], true)
}

/// Validation error along a τ grid at fixed μ, either for the elastic net
/// alone (`refit = None`) or followed by a ridge refit with the given λ.
#[derive(Clone, Debug)]
pub struct ValidationCurve {
    pub tau_values: Vec<f64>,
    /// `None` where the solve did not converge or the refit was ill-posed.
    pub errors: Vec<Option<f64>>,
    pub models: Vec<Option<LinearModel>>,
}

impl ValidationCurve {
    /// Index of the lowest error; ties go to the larger τ.
    pub fn argmin(&self) -> Option<usize> {
        self.errors
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.map(|e| (i, e)))
            .fold(None, |best: Option<(usize, f64)>, (i, e)| match best {
                Some((_, b)) if b <= e => best,
                _ => Some((i, e)),
            })
            .map(|(i, _)| i)
    }

    pub fn min_error(&self) -> Option<f64> {
        self.argmin().and_then(|i| self.errors[i])
    }
}

pub fn validation_curve(
    train: &Dataset,
    validation: &Dataset,
    tau_values: &[f64],
    mu: f64,
    refit: Option<f64>,
    config: &IterationConfig,
) -> Result<ValidationCurve> {
    check_task(train, validation)?;
    if tau_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("tau values must be strictly decreasing".into()));
    }
    let metric = ErrorMetric::default_for(train.task());
    let centered = CenteredData::from_dataset(train)?;
    let path = tau_path(&centered, tau_values, mu, &SolveStrategy::Direct, config)?;
    let mut errors = Vec::with_capacity(path.len());
    let mut models = Vec::with_capacity(path.len());
    for (report, &tau) in path.iter().zip(tau_values) {
        let params = HyperParams::new(tau, mu, refit.unwrap_or(0.0))?;
        let model = match refit {
            _ if !report.converged => None,
            None => Some(elastic_net_model(&centered, report, params)?),
            Some(_) => match debias(&centered, report, params) {
                Ok(m) => Some(m),
                Err(Error::IllPosed) => None,
                Err(e) => return Err(e),
            },
        };
        let error = match &model {
            Some(m) => Some(holdout_error(&sample_losses(m, validation, metric)?, metric)),
            None => None,
        };
        errors.push(error);
        models.push(model);
    }
    Ok(ValidationCurve {
        tau_values: tau_values.to_vec(),
        errors,
        models,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
}

impl From<&SolveReport> for SolveDiagnostics {
    fn from(r: &SolveReport) -> Self {
        Self {
            iterations: r.iterations,
            converged: r.converged,
            kkt_residual: r.kkt_residual,
        }
    }
}

/// Outcome of Stage II, indexed like `mu_values` (ascending).
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub mu_values: Vec<f64>,
    pub mode: SweepMode,
    pub models: Vec<LinearModel>,
    pub diagnostics: Vec<SolveDiagnostics>,
    /// Present when a test set was supplied.
    pub test_errors: Option<Vec<ErrorRecord>>,
    /// Present when the sweep has at least two values.
    pub nesting: Option<NestingReport>,
}

impl SweepResult {
    pub fn supports(&self) -> Vec<Vec<usize>> {
        self.models.iter().map(|m| m.support().to_vec()).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.diagnostics.iter().all(|d| d.converged)
    }
}

/// Elastic-net solutions for an ascending μ list at fixed τ.
fn sweep_solutions(
    centered: &CenteredData,
    tau: f64,
    mus: &[f64],
    mode: SweepMode,
    config: &IterationConfig,
) -> Result<Vec<SolveReport>> {
    let x = centered.x.view();
    let y = centered.y.view();
    let step = match config.step_bound {
        Some(c) => c,
        None => estimate_step_bound(x)?,
    };
    let cfg = IterationConfig {
        step_bound: Some(step),
        ..config.clone()
    };
    match mode {
        SweepMode::Cascade => {
            let descending: Vec<f64> = mus.iter().rev().copied().collect();
            let mut path = cascade_path(x, y, tau, &descending, &cfg)?;
            path.reverse();
            Ok(path)
        }
        SweepMode::Independent => mus
            .iter()
            .map(|&mu| {
                let params = HyperParams::new(tau, mu, 0.0)?;
                elastic_net_solve(x, y, &params, &IterationConfig { initial_point: None, ..cfg.clone() })
            })
            .collect(),
    }
}

/// Stage II: models on the full training set at `(τ_opt, μ, λ_opt)` for every
/// μ of the sweep, scored on `test` when given.
///
/// In cascade mode the sweep is solved from the largest μ downward, each
/// smaller μ restricted to the support of the next larger one, so
/// `support(μ_i) ⊆ support(μ_{i+1})` holds exactly.
pub fn stage2_sweep(
    train: &Dataset,
    test: Option<&Dataset>,
    cv: &CvResult,
    grid: &GridSpec,
    config: &IterationConfig,
    mode: SweepMode,
) -> Result<SweepResult> {
    grid.validate()?;
    if let Some(test) = test {
        check_task(train, test)?;
    }
    let centered = CenteredData::from_dataset(train)?;
    let reports = sweep_solutions(&centered, cv.tau_opt, &grid.mu_sweep, mode, config)?;
    let models = reports
        .iter()
        .zip(&grid.mu_sweep)
        .map(|(r, &mu)| debias(&centered, r, HyperParams::new(cv.tau_opt, mu, cv.lambda_opt)?))
        .collect::<Result<Vec<_>>>()?;
    let test_errors = match test {
        Some(t) => Some(models.iter().map(|m| evaluate(m, t)).collect::<Result<Vec<_>>>()?),
        None => None,
    };
    let supports: Vec<Vec<usize>> = models.iter().map(|m| m.support().to_vec()).collect();
    let nesting = if supports.len() >= 2 {
        Some(nesting_overlap(&supports)?)
    } else {
        None
    };
    Ok(SweepResult {
        mu_values: grid.mu_sweep.clone(),
        mode,
        models,
        diagnostics: reports.iter().map(SolveDiagnostics::from).collect(),
        test_errors,
        nesting,
    })
}

/// Elastic-net supports `[μ][fold]` obtained by running the Stage II sweep at
/// `tau` on the training part of every fold; input for stability counts.
pub fn sweep_fold_supports(
    train: &Dataset,
    folds: &FoldPlan,
    tau: f64,
    mus: &[f64],
    mode: SweepMode,
    config: &IterationConfig,
) -> Result<Vec<Vec<Vec<usize>>>> {
    if folds.n_samples() != train.n_samples() {
        return Err(dim_mismatch("fold plan size", train.n_samples(), folds.n_samples()));
    }
    let per_fold = (0..folds.k())
        .into_par_iter()
        .map(|fold| {
            let fit = train.subset(&folds.training_indices(fold));
            let centered = CenteredData::from_dataset(&fit)?;
            let reports = sweep_solutions(&centered, tau, mus, mode, config)?;
            Ok(reports.iter().map(SolveReport::support).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..mus.len())
        .map(|m| per_fold.iter().map(|f| f[m].clone()).collect())
        .collect())
}
