//! Post-hoc evaluation: nesting of feature lists, rejection regions around the
//! decision threshold, selection-frequency stability and support recovery.

use std::collections::BTreeSet;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::Serialize;

use crate::data::sign_label;
use crate::error::{dim_mismatch, Error, Result};

/// Cardinality of each list and, for each adjacent pair, the percentage of
/// the first list found in the next one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NestingReport {
    pub cardinalities: Vec<usize>,
    pub overlap_percent: Vec<f64>,
}

impl NestingReport {
    pub fn mean_overlap(&self) -> f64 {
        if self.overlap_percent.is_empty() {
            return 100.0;
        }
        self.overlap_percent.iter().sum::<f64>() / self.overlap_percent.len() as f64
    }

    pub fn perfectly_nested(&self) -> bool {
        self.overlap_percent.iter().all(|&o| o == 100.0)
    }
}

/// `|S_i ∩ S_{i+1}| / |S_i| · 100` for adjacent supports, ordered by μ. An
/// empty `S_i` counts as fully contained.
pub fn nesting_overlap(supports: &[Vec<usize>]) -> Result<NestingReport> {
    if supports.len() < 2 {
        return Err(Error::InvalidParameter(
            "nesting needs at least two supports".into(),
        ));
    }
    let sets: Vec<BTreeSet<usize>> = supports.iter().map(|s| s.iter().copied().collect()).collect();
    let overlap_percent = sets
        .windows(2)
        .map(|w| {
            if w[0].is_empty() {
                100.0
            } else {
                100.0 * w[0].intersection(&w[1]).count() as f64 / w[0].len() as f64
            }
        })
        .collect();
    Ok(NestingReport {
        cardinalities: sets.iter().map(BTreeSet::len).collect(),
        overlap_percent,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionShape {
    /// Nothing misclassified; nothing rejected.
    Degenerate,
    OneSided,
    TwoSided,
}

/// Closed score interval `[lower, upper]` around the threshold whose removal
/// leaves only correctly classified samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RejectionReport {
    pub lower: f64,
    pub upper: f64,
    pub shape: RegionShape,
    /// Fraction of samples predicted −1 that fall in the region.
    pub rejected_predicted_negative: f64,
    /// Fraction of samples predicted +1 that fall in the region.
    pub rejected_predicted_positive: f64,
    pub n_rejected: usize,
}

impl RejectionReport {
    pub fn rejects(&self, score: f64) -> bool {
        self.shape != RegionShape::Degenerate && score >= self.lower && score <= self.upper
    }
}

/// Smallest closed interval containing 0 and every misclassified score.
///
/// Predictions use `sign(score)` with zero counted as +1, so a negative sample
/// scoring exactly 0 is misclassified. Fractions are per predicted class.
pub fn rejection_region(scores: ArrayView1<'_, f64>, labels: ArrayView1<'_, f64>) -> Result<RejectionReport> {
    if scores.len() != labels.len() {
        return Err(dim_mismatch("label count", scores.len(), labels.len()));
    }
    let mut lower: f64 = 0.0;
    let mut upper: f64 = 0.0;
    let mut any_error = false;
    for (&s, &l) in scores.iter().zip(labels.iter()) {
        if sign_label(s) != l {
            any_error = true;
            if l > 0.0 {
                lower = lower.min(s);
            } else {
                upper = upper.max(s);
            }
        }
    }
    let shape = match (any_error, lower < 0.0, upper > 0.0) {
        (false, _, _) => RegionShape::Degenerate,
        (true, true, true) => RegionShape::TwoSided,
        _ => RegionShape::OneSided,
    };
    let mut report = RejectionReport {
        lower,
        upper,
        shape,
        rejected_predicted_negative: 0.0,
        rejected_predicted_positive: 0.0,
        n_rejected: 0,
    };
    let (mut neg_total, mut neg_rejected, mut pos_total, mut pos_rejected) = (0usize, 0usize, 0usize, 0usize);
    for &s in scores.iter() {
        let rejected = report.rejects(s);
        if sign_label(s) > 0.0 {
            pos_total += 1;
            pos_rejected += rejected as usize;
        } else {
            neg_total += 1;
            neg_rejected += rejected as usize;
        }
    }
    let frac = |r: usize, t: usize| if t == 0 { 0.0 } else { r as f64 / t as f64 };
    report.rejected_predicted_negative = frac(neg_rejected, neg_total);
    report.rejected_predicted_positive = frac(pos_rejected, pos_total);
    report.n_rejected = neg_rejected + pos_rejected;

    debug_assert!(scores
        .iter()
        .zip(labels.iter())
        .all(|(&s, &l)| report.rejects(s) || sign_label(s) == l));
    Ok(report)
}

/// Per-feature selection counts across resampled fits and the cumulative
/// number of features selected at least a given fraction of the time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub n_folds: usize,
    pub counts: Vec<usize>,
    /// Decile thresholds 0.1, 0.2, …, 1.0.
    pub thresholds: Vec<f64>,
    /// `cumulative[d]` = number of features with frequency ≥ `thresholds[d]`.
    pub cumulative: Vec<usize>,
    pub mean_support_size: f64,
}

impl StabilityReport {
    /// Features present in every fit.
    pub fn always_selected(&self) -> usize {
        self.counts.iter().filter(|&&c| c == self.n_folds).count()
    }

    pub fn at_least(&self, fraction: f64) -> usize {
        self.counts
            .iter()
            .filter(|&&c| c as f64 >= fraction * self.n_folds as f64)
            .count()
    }
}

pub fn selection_frequency(per_fold_supports: &[Vec<usize>], p: usize) -> Result<StabilityReport> {
    if per_fold_supports.is_empty() {
        return Err(Error::InvalidParameter("no supports to count".into()));
    }
    let k = per_fold_supports.len();
    let mut counts = vec![0usize; p];
    for support in per_fold_supports {
        let unique: BTreeSet<usize> = support.iter().copied().collect();
        for j in unique {
            if j >= p {
                return Err(Error::InvalidParameter(format!("feature index {j} >= p = {p}")));
            }
            counts[j] += 1;
        }
    }
    let thresholds: Vec<f64> = (1..=10).map(|d| d as f64 / 10.0).collect();
    // count/k ≥ d/10  ⇔  10·count ≥ d·k
    let cumulative = (1..=10)
        .map(|d| counts.iter().filter(|&&c| 10 * c >= d * k).count())
        .collect();
    let mean_support_size = counts.iter().sum::<usize>() as f64 / k as f64;
    Ok(StabilityReport {
        n_folds: k,
        counts,
        thresholds,
        cumulative,
        mean_support_size,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryOutcome {
    /// Exactly one feature per true group and nothing else.
    Correct,
    /// One group contributes two features, the others one, nothing else.
    SlightlyRedundant,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveryScore {
    pub outcome: RecoveryOutcome,
    pub per_group: Vec<usize>,
    pub n_relevant: usize,
    pub n_selected: usize,
    /// Relevant selected over all selected; zero for an empty selection.
    pub ratio: f64,
}

impl RecoveryScore {
    pub fn correct_model(&self) -> bool {
        self.outcome == RecoveryOutcome::Correct
    }
}

pub fn support_recovery_score(selected: &[usize], true_groups: &[Vec<usize>]) -> RecoveryScore {
    let selected: BTreeSet<usize> = selected.iter().copied().collect();
    let per_group: Vec<usize> = true_groups
        .iter()
        .map(|g| g.iter().filter(|j| selected.contains(j)).count())
        .collect();
    let n_relevant: usize = per_group.iter().sum();
    let n_selected = selected.len();
    let outside = n_selected - n_relevant;
    let outcome = if outside == 0 && per_group.iter().all(|&c| c == 1) {
        RecoveryOutcome::Correct
    } else if outside == 0
        && per_group.iter().all(|&c| c == 1 || c == 2)
        && per_group.iter().filter(|&&c| c == 2).count() == 1
    {
        RecoveryOutcome::SlightlyRedundant
    } else {
        RecoveryOutcome::Other
    };
    let ratio = if n_selected == 0 {
        0.0
    } else {
        n_relevant as f64 / n_selected as f64
    };
    RecoveryScore {
        outcome,
        per_group,
        n_relevant,
        n_selected,
        ratio,
    }
}

/// Rows of `features` (in the given order) by samples, each row shifted and
/// scaled to zero mean and unit population variance across samples.
pub fn standardized_submatrix(samples: ArrayView2<'_, f64>, features: &[usize]) -> Result<Array2<f64>> {
    let n = samples.nrows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut out = Array2::zeros((features.len(), n));
    for (row, &j) in features.iter().enumerate() {
        if j >= samples.ncols() {
            return Err(dim_mismatch("feature index bound", samples.ncols(), j));
        }
        let col = samples.column(j);
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        if !(var > 0.0) {
            return Err(Error::InvalidData(format!("zero variance feature at column {j}")));
        }
        let sd = var.sqrt();
        for (i, v) in col.iter().enumerate() {
            out[[row, i]] = (v - mean) / sd;
        }
    }
    Ok(out)
}
