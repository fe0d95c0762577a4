//! JSON configuration for `run` and `synth`, with path resolution and
//! validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CliError;
use crate::pipeline::{
    default_mu_sweep, lambda_grid, tau_grid, ErrorMetric, GridSpec, SelectionRule, SolveStrategy, SweepMode,
    DEFAULT_LAMBDA_COUNT, DEFAULT_LAMBDA_RANGE, DEFAULT_MU_STAGE1, DEFAULT_TAU_COUNT, DEFAULT_TAU_MIN_RATIO,
};
use crate::solver::IterationConfig;
use crate::TaskKind;

/// Fold count, or leave-one-out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FoldCount {
    K(usize),
    LeaveOneOut,
}

impl FoldCount {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            FoldCount::K(k) => k,
            FoldCount::LeaveOneOut => n,
        }
    }
}

impl FromStr for FoldCount {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("loo") {
            return Ok(FoldCount::LeaveOneOut);
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 2 => Ok(FoldCount::K(k)),
            _ => Err(format!("invalid fold count '{s}': expected an integer >= 2 or 'loo'")),
        }
    }
}

impl fmt::Display for FoldCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoldCount::K(k) => write!(f, "{k}"),
            FoldCount::LeaveOneOut => f.write_str("loo"),
        }
    }
}

impl Serialize for FoldCount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            FoldCount::K(k) => s.serialize_u64(*k as u64),
            FoldCount::LeaveOneOut => s.serialize_str("loo"),
        }
    }
}

impl<'de> Deserialize<'de> for FoldCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(|k| k as usize)
                .filter(|&k| k >= 2)
                .map(FoldCount::K)
                .ok_or_else(|| serde::de::Error::custom("fold count must be an integer >= 2")),
            serde_json::Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            _ => Err(serde::de::Error::custom("fold count must be a number or \"loo\"")),
        }
    }
}

/// One entry of the μ sweep: an absolute value, or a multiple of the τ
/// chosen by Stage I written as `"<factor>tau"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MuValue {
    Absolute(f64),
    TauMultiple(f64),
}

impl MuValue {
    pub fn resolve(self, tau_opt: f64) -> f64 {
        match self {
            MuValue::Absolute(v) => v,
            MuValue::TauMultiple(f) => f * tau_opt,
        }
    }
}

impl FromStr for MuValue {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let err = || format!("invalid mu value '{s}': expected a number or '<factor>tau'");
        let (text, relative) = match s.strip_suffix("tau") {
            Some(head) => (head.trim_end_matches('*').trim(), true),
            None => (s, false),
        };
        let v: f64 = text.parse().map_err(|_| err())?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(err());
        }
        Ok(if relative { MuValue::TauMultiple(v) } else { MuValue::Absolute(v) })
    }
}

impl Serialize for MuValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            MuValue::Absolute(v) => s.serialize_f64(*v),
            MuValue::TauMultiple(f) => s.serialize_str(&format!("{f}tau")),
        }
    }
}

impl<'de> Deserialize<'de> for MuValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => n
                .as_f64()
                .filter(|v| *v >= 0.0)
                .map(MuValue::Absolute)
                .ok_or_else(|| serde::de::Error::custom("mu values must be >= 0")),
            serde_json::Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            _ => Err(serde::de::Error::custom("mu value must be a number or \"<factor>tau\"")),
        }
    }
}

pub fn parse_mu_list(s: &str) -> Result<Vec<MuValue>, String> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect()
}

/// Grid overrides. Explicit value lists win over count/range settings; the
/// τ range is relative to the τ_max of the training set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub tau_values: Option<Vec<f64>>,
    pub tau_count: usize,
    pub tau_min_ratio: f64,
    pub lambda_values: Option<Vec<f64>>,
    pub lambda_count: usize,
    pub lambda_range: (f64, f64),
    pub mu_stage1: f64,
    pub stage1_strategy: SolveStrategy,
    pub selection: SelectionRule,
    pub metric: Option<ErrorMetric>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            tau_values: None,
            tau_count: DEFAULT_TAU_COUNT,
            tau_min_ratio: DEFAULT_TAU_MIN_RATIO,
            lambda_values: None,
            lambda_count: DEFAULT_LAMBDA_COUNT,
            lambda_range: DEFAULT_LAMBDA_RANGE,
            mu_stage1: DEFAULT_MU_STAGE1,
            stage1_strategy: SolveStrategy::default_cascade(),
            selection: SelectionRule::OneStandardError,
            metric: None,
        }
    }
}

impl GridConfig {
    /// Stage I grid with the μ sweep still unresolved (set to `[mu_stage1]`).
    pub fn build(&self, tau_max: f64) -> Result<GridSpec, CliError> {
        if self.tau_values.is_none() && !(self.tau_count >= 1 && self.tau_min_ratio > 0.0 && self.tau_min_ratio <= 1.0) {
            return Err(CliError::Config("tau_count must be >= 1 and tau_min_ratio in (0, 1]".into()));
        }
        if self.lambda_values.is_none()
            && !(self.lambda_count >= 1 && self.lambda_range.0 > 0.0 && self.lambda_range.0 <= self.lambda_range.1)
        {
            return Err(CliError::Config("lambda_count must be >= 1 and lambda_range positive and ordered".into()));
        }
        if self.tau_values.is_none() && !(tau_max > 0.0) {
            return Err(CliError::Data("all responses are uncorrelated with the features (tau_max = 0)".into()));
        }
        let tau_values = match &self.tau_values {
            Some(v) => v.clone(),
            None if self.tau_count == 1 => vec![tau_max],
            None => tau_grid(tau_max, self.tau_count, self.tau_min_ratio),
        };
        let lambda_values = match &self.lambda_values {
            Some(v) => v.clone(),
            None if self.lambda_count == 1 => vec![self.lambda_range.0],
            None => lambda_grid(self.lambda_range.0, self.lambda_range.1, self.lambda_count),
        };
        let grid = GridSpec {
            tau_values,
            lambda_values,
            mu_stage1: self.mu_stage1,
            mu_sweep: vec![self.mu_stage1],
            stage1_strategy: self.stage1_strategy.clone(),
            selection: self.selection,
            metric: self.metric,
        };
        grid.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(grid)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tolerance_numerator: f64,
    pub kkt_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let c = IterationConfig::default();
        Self {
            tolerance_numerator: c.tolerance_numerator,
            kkt_tolerance: c.kkt_tolerance,
            max_iterations: c.max_iterations,
        }
    }
}

impl SolverConfig {
    pub fn build(&self) -> Result<IterationConfig, CliError> {
        if !(self.tolerance_numerator > 0.0 && self.kkt_tolerance > 0.0 && self.max_iterations >= 1) {
            return Err(CliError::Config("solver tolerances must be positive and max_iterations >= 1".into()));
        }
        Ok(IterationConfig {
            tolerance_numerator: self.tolerance_numerator,
            kkt_tolerance: self.kkt_tolerance,
            max_iterations: self.max_iterations,
            ..IterationConfig::default()
        })
    }
}

fn default_folds() -> FoldCount {
    FoldCount::K(10)
}

fn default_sweep() -> Vec<MuValue> {
    default_mu_sweep().into_iter().map(MuValue::Absolute).collect()
}

fn default_mode() -> SweepMode {
    SweepMode::Cascade
}

/// Everything `run` needs. The output directory and worker count are not
/// serialized, so a manifest is identical across reruns and worker counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub train: PathBuf,
    /// Two-column label file for `train`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    /// Name of a matrix column holding the responses (alternative to `labels`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_labels: Option<PathBuf>,
    /// Fraction of samples held out by a seeded split when `test` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_fraction: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: FoldCount,
    #[serde(default)]
    pub stratified: bool,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_sweep")]
    pub mu_sweep: Vec<MuValue>,
    #[serde(default = "default_mode")]
    pub mode: SweepMode,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(task: TaskKind, train: PathBuf) -> Self {
        Self {
            task,
            train,
            labels: None,
            label_column: None,
            test: None,
            test_labels: None,
            test_fraction: None,
            seed: 0,
            folds: default_folds(),
            stratified: false,
            grid: GridConfig::default(),
            mu_sweep: default_sweep(),
            mode: default_mode(),
            solver: SolverConfig::default(),
            out: None,
            workers: None,
        }
    }

    /// Makes every input path absolute, interpreting relative ones against
    /// `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
            if let Ok(c) = p.canonicalize() {
                *p = c;
            }
        };
        fix(&mut self.train);
        for p in [&mut self.labels, &mut self.test, &mut self.test_labels].into_iter().flatten() {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for p in [Some(&self.train), self.labels.as_ref(), self.test.as_ref(), self.test_labels.as_ref()]
            .into_iter()
            .flatten()
        {
            if !p.is_file() {
                return Err(CliError::Config(format!("input file not found: {}", p.display())));
            }
        }
        if self.labels.is_some() == self.label_column.is_some() {
            return Err(CliError::Config("give exactly one of 'labels' or 'label_column'".into()));
        }
        if self.test.is_none() && self.test_labels.is_some() {
            return Err(CliError::Config("'test_labels' requires 'test'".into()));
        }
        if self.test.is_some() && self.test_labels.is_none() && self.label_column.is_none() {
            return Err(CliError::Config("'test' requires 'test_labels' or 'label_column'".into()));
        }
        if self.test.is_some() && self.test_fraction.is_some() {
            return Err(CliError::Config("give at most one of 'test' and 'test_fraction'".into()));
        }
        if let Some(f) = self.test_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(CliError::Config("test_fraction must lie in (0, 1)".into()));
            }
        }
        if self.mu_sweep.is_empty() {
            return Err(CliError::Config("mu sweep is empty".into()));
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("workers must be >= 1".into()));
        }
        self.solver.build()?;
        Ok(())
    }
}

/// Ascending, deduplicated absolute μ values together with the entries
/// that produced them.
pub fn resolve_sweep(values: &[MuValue], tau_opt: f64, mu_stage1: f64) -> Result<Vec<(f64, MuValue)>, CliError> {
    let mut v: Vec<(f64, MuValue)> = values.iter().map(|&m| (m.resolve(tau_opt), m)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v.dedup_by(|a, b| a.0 == b.0);
    if v[0].0 != 0.0 && v[0].0 != mu_stage1 {
        return Err(CliError::Config(format!(
            "mu sweep must start at 0 or at mu_stage1 = {mu_stage1}, got {}",
            v[0].0
        )));
    }
    Ok(v)
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
