//! Datasets, centering, fold plans and the linear model type.
//!
//! Samples are stored dense and row-major (one row per sample). No scaling is
//! ever applied: the only preprocessing is recentering on the training-set
//! center of mass, and held-out data is always transformed with the transform
//! fitted on the training split.

use std::collections::HashSet;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::random::SeededRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// Responses are ±1 labels.
    Classification,
    Regression,
}

/// Learning input: `n × p` sample matrix, `n` responses and `p` feature ids.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    samples: Array2<f64>,
    responses: Array1<f64>,
    feature_ids: Vec<String>,
    sample_ids: Vec<String>,
    task: TaskKind,
}

/// `x1, x2, …, xp`.
pub fn default_feature_ids(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

fn default_sample_ids(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("s{i}")).collect()
}

impl Dataset {
    pub fn new(
        samples: Array2<f64>,
        responses: Array1<f64>,
        feature_ids: Vec<String>,
        task: TaskKind,
    ) -> Result<Self> {
        let n = samples.nrows();
        Self::with_sample_ids(samples, responses, feature_ids, default_sample_ids(n), task)
    }

    /// Builds a dataset with generated feature ids `x1..xp`.
    pub fn from_arrays(samples: Array2<f64>, responses: Array1<f64>, task: TaskKind) -> Result<Self> {
        let p = samples.ncols();
        Self::new(samples, responses, default_feature_ids(p), task)
    }

    pub fn with_sample_ids(
        samples: Array2<f64>,
        responses: Array1<f64>,
        feature_ids: Vec<String>,
        sample_ids: Vec<String>,
        task: TaskKind,
    ) -> Result<Self> {
        let (n, p) = samples.dim();
        if responses.len() != n {
            return Err(dim_mismatch("response count", n, responses.len()));
        }
        if feature_ids.len() != p {
            return Err(dim_mismatch("feature id count", p, feature_ids.len()));
        }
        if sample_ids.len() != n {
            return Err(dim_mismatch("sample id count", n, sample_ids.len()));
        }
        let mut seen = HashSet::with_capacity(p);
        for id in &feature_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidData(format!("duplicated feature id '{id}'")));
            }
        }
        if let Some(((i, j), v)) = samples.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite value {v} at sample {i}, feature {j}"
            )));
        }
        if let Some((i, v)) = responses.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite response {v} at sample {i}")));
        }
        if task == TaskKind::Classification {
            if let Some((i, v)) = responses
                .iter()
                .enumerate()
                .find(|(_, &v)| v != 1.0 && v != -1.0)
            {
                return Err(Error::InvalidData(format!(
                    "classification label {v} at sample {i} is not +1 or -1"
                )));
            }
        }
        Ok(Self {
            samples,
            responses,
            feature_ids,
            sample_ids,
            task,
        })
    }

    pub fn samples(&self) -> ArrayView2<'_, f64> {
        self.samples.view()
    }

    pub fn responses(&self) -> ArrayView1<'_, f64> {
        self.responses.view()
    }

    pub fn feature_ids(&self) -> &[String] {
        &self.feature_ids
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn n_samples(&self) -> usize {
        self.samples.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.samples.ncols()
    }

    /// Rows selected by `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            samples: self.samples.select(Axis(0), indices),
            responses: self.responses.select(Axis(0), indices),
            feature_ids: self.feature_ids.clone(),
            sample_ids: indices.iter().map(|&i| self.sample_ids[i].clone()).collect(),
            task: self.task,
        }
    }

    /// Columns selected by `indices`, in that order.
    pub fn select_features(&self, indices: &[usize]) -> Dataset {
        Dataset {
            samples: self.samples.select(Axis(1), indices),
            responses: self.responses.clone(),
            feature_ids: indices.iter().map(|&j| self.feature_ids[j].clone()).collect(),
            sample_ids: self.sample_ids.clone(),
            task: self.task,
        }
    }
}

/// Per-feature means and response mean fitted on a training set.
#[derive(Clone, Debug, PartialEq)]
pub struct CenteringTransform {
    pub feature_means: Array1<f64>,
    pub response_mean: f64,
}

impl CenteringTransform {
    pub fn zeros(p: usize) -> Self {
        Self {
            feature_means: Array1::zeros(p),
            response_mean: 0.0,
        }
    }

    pub fn fit(samples: ArrayView2<'_, f64>, responses: ArrayView1<'_, f64>) -> Result<Self> {
        let n = samples.nrows();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if responses.len() != n {
            return Err(dim_mismatch("response count", n, responses.len()));
        }
        let feature_means = samples
            .mean_axis(Axis(0))
            .ok_or(Error::EmptyDataset)?;
        let response_mean = responses.sum() / n as f64;
        Ok(Self {
            feature_means,
            response_mean,
        })
    }

    pub fn n_features(&self) -> usize {
        self.feature_means.len()
    }

    pub fn apply_samples(&self, samples: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if samples.ncols() != self.feature_means.len() {
            return Err(dim_mismatch(
                "feature count",
                self.feature_means.len(),
                samples.ncols(),
            ));
        }
        Ok(&samples - &self.feature_means)
    }

    pub fn apply_responses(&self, responses: ArrayView1<'_, f64>) -> Array1<f64> {
        responses.mapv(|y| y - self.response_mean)
    }

    pub fn apply(
        &self,
        samples: ArrayView2<'_, f64>,
        responses: Option<ArrayView1<'_, f64>>,
    ) -> Result<(Array2<f64>, Option<Array1<f64>>)> {
        let x = self.apply_samples(samples)?;
        if let Some(y) = responses {
            if y.len() != samples.nrows() {
                return Err(dim_mismatch("response count", samples.nrows(), y.len()));
            }
        }
        Ok((x, responses.map(|y| self.apply_responses(y))))
    }
}

pub fn fit_centering(data: &Dataset) -> Result<CenteringTransform> {
    CenteringTransform::fit(data.samples(), data.responses())
}

pub fn apply_centering(
    transform: &CenteringTransform,
    samples: ArrayView2<'_, f64>,
    responses: Option<ArrayView1<'_, f64>>,
) -> Result<(Array2<f64>, Option<Array1<f64>>)> {
    transform.apply(samples, responses)
}

/// A dataset recentered on its own center of mass, together with the transform.
#[derive(Clone, Debug)]
pub struct CenteredData {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub transform: CenteringTransform,
}

impl CenteredData {
    pub fn from_dataset(data: &Dataset) -> Result<Self> {
        let transform = fit_centering(data)?;
        let x = transform.apply_samples(data.samples())?;
        let y = transform.apply_responses(data.responses());
        Ok(Self { x, y, transform })
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }
}

/// Assignment of each of `n` samples to one of `k` folds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldPlan {
    assignments: Vec<usize>,
    k: usize,
}

fn check_fold_count(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!(
            "fold count {k} must satisfy 2 <= k <= n = {n}"
        )));
    }
    Ok(())
}

/// Seeded uniform shuffle followed by a round-robin deal, so fold sizes
/// differ by at most one. `k == n` is leave-one-out.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    check_fold_count(n, k)?;
    let mut order: Vec<usize> = (0..n).collect();
    SeededRng::new(seed).shuffle(&mut order);
    let mut assignments = vec![0; n];
    for (position, &sample) in order.iter().enumerate() {
        assignments[sample] = position % k;
    }
    Ok(FoldPlan { assignments, k })
}

/// Like [`make_folds`], but each label class is shuffled on its own and the
/// classes are dealt consecutively, which spreads every class evenly.
pub fn make_stratified_folds(labels: ArrayView1<'_, f64>, k: usize, seed: u64) -> Result<FoldPlan> {
    let n = labels.len();
    check_fold_count(n, k)?;
    let mut rng = SeededRng::new(seed);
    let mut positives: Vec<usize> = (0..n).filter(|&i| labels[i] > 0.0).collect();
    let mut negatives: Vec<usize> = (0..n).filter(|&i| labels[i] <= 0.0).collect();
    rng.shuffle(&mut positives);
    rng.shuffle(&mut negatives);
    let mut assignments = vec![0; n];
    for (position, &sample) in positives.iter().chain(negatives.iter()).enumerate() {
        assignments[sample] = position % k;
    }
    Ok(FoldPlan { assignments, k })
}

impl FoldPlan {
    pub fn from_assignments(assignments: Vec<usize>, k: usize) -> Result<Self> {
        check_fold_count(assignments.len(), k)?;
        let mut sizes = vec![0usize; k];
        for &a in &assignments {
            if a >= k {
                return Err(Error::InvalidParameter(format!("fold index {a} >= k = {k}")));
            }
            sizes[a] += 1;
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidParameter("empty fold".into()));
        }
        Ok(Self { assignments, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_samples(&self) -> usize {
        self.assignments.len()
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn is_leave_one_out(&self) -> bool {
        self.k == self.assignments.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    /// Held-out indices of fold `fold`.
    pub fn validation_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    /// Indices of the `k - 1` complementary folds.
    pub fn training_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

/// The (τ, μ, λ) triple: ℓ¹ weight, ℓ² weight and debiasing-ridge weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub tau: f64,
    pub mu: f64,
    pub lambda: f64,
}

impl HyperParams {
    pub fn new(tau: f64, mu: f64, lambda: f64) -> Result<Self> {
        for (name, v) in [("tau", tau), ("mu", mu), ("lambda", lambda)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(Self { tau, mu, lambda })
    }
}

/// Sparse linear predictor together with the centering it predicts under.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    weights: Array1<f64>,
    support: Vec<usize>,
    centering: CenteringTransform,
    hyperparams: HyperParams,
    converged: bool,
}

impl LinearModel {
    pub fn new(
        weights: Array1<f64>,
        centering: CenteringTransform,
        hyperparams: HyperParams,
        converged: bool,
    ) -> Result<Self> {
        if weights.len() != centering.n_features() {
            return Err(dim_mismatch(
                "weight count",
                centering.n_features(),
                weights.len(),
            ));
        }
        let support = support_of(weights.view());
        Ok(Self {
            weights,
            support,
            centering,
            hyperparams,
            converged,
        })
    }

    /// Model with all weights zero; it predicts the training response mean.
    pub fn zero(centering: CenteringTransform, hyperparams: HyperParams) -> Self {
        let p = centering.n_features();
        Self {
            weights: Array1::zeros(p),
            support: Vec::new(),
            centering,
            hyperparams,
            converged: true,
        }
    }

    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.weights.view()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn cardinality(&self) -> usize {
        self.support.len()
    }

    pub fn centering(&self) -> &CenteringTransform {
        &self.centering
    }

    pub fn hyperparams(&self) -> HyperParams {
        self.hyperparams
    }

    /// False when the elastic-net stage hit its iteration budget.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    /// `β · (x − x̄) + ȳ`. Classification callers take the sign.
    pub fn predict(&self, sample: ArrayView1<'_, f64>) -> Result<f64> {
        if sample.len() != self.weights.len() {
            return Err(dim_mismatch("sample length", self.weights.len(), sample.len()));
        }
        let means = &self.centering.feature_means;
        let score = self
            .support
            .iter()
            .map(|&j| self.weights[j] * (sample[j] - means[j]))
            .sum::<f64>();
        Ok(score + self.centering.response_mean)
    }

    pub fn predict_many(&self, samples: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        if samples.ncols() != self.weights.len() {
            return Err(dim_mismatch("feature count", self.weights.len(), samples.ncols()));
        }
        samples.rows().into_iter().map(|row| self.predict(row)).collect()
    }
}

/// Free-function form of [`LinearModel::predict`].
pub fn predict(model: &LinearModel, sample: ArrayView1<'_, f64>) -> Result<f64> {
    model.predict(sample)
}

/// Class label for a score; zero is assigned to the positive class.
pub fn sign_label(score: f64) -> f64 {
    if score >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Sorted indices of the exactly-nonzero entries.
pub fn support_of(weights: ArrayView1<'_, f64>) -> Vec<usize> {
    weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(j, _)| j)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn regression(samples: Array2<f64>, responses: Array1<f64>) -> Dataset {
        Dataset::from_arrays(samples, responses, TaskKind::Regression).unwrap()
    }

    #[test]
    fn centering_means() {
        let d = regression(array![[1.0, 3.0], [3.0, 5.0]], array![0.0, 2.0]);
        let t = fit_centering(&d).unwrap();
        assert_eq!(t.feature_means, array![2.0, 4.0]);
        assert_eq!(t.response_mean, 1.0);
    }

    #[test]
    fn centering_of_centered_data_is_zero() {
        let d = regression(array![[1.0, -2.0], [-1.0, 2.0]], array![0.5, -0.5]);
        let t = fit_centering(&d).unwrap();
        assert_eq!(t.feature_means, array![0.0, 0.0]);
        assert_eq!(t.response_mean, 0.0);
    }

    #[test]
    fn single_sample_centering() {
        let d = Dataset::from_arrays(array![[7.0]], array![-1.0], TaskKind::Classification).unwrap();
        let t = fit_centering(&d).unwrap();
        assert_eq!(t.feature_means, array![7.0]);
        assert_eq!(t.response_mean, -1.0);
    }

    #[test]
    fn empty_dataset_rejected() {
        let d = regression(Array2::zeros((0, 3)), Array1::zeros(0));
        assert_eq!(fit_centering(&d), Err(Error::EmptyDataset));
    }

    #[test]
    fn apply_centering_examples() {
        let t = CenteringTransform {
            feature_means: array![2.0, 4.0],
            response_mean: 1.0,
        };
        let (x, y) = apply_centering(&t, array![[1.0, 3.0]].view(), Some(array![3.0].view())).unwrap();
        assert_eq!(x, array![[-1.0, -1.0]]);
        assert_eq!(y.unwrap(), array![2.0]);

        let zero = CenteringTransform::zeros(2);
        let input = array![[1.5, -3.0], [0.0, 2.0]];
        let (x, y) = zero.apply(input.view(), None).unwrap();
        assert_eq!(x, input);
        assert!(y.is_none());

        assert!(matches!(
            t.apply(array![[1.0, 2.0, 3.0]].view(), None),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn dataset_invariants() {
        assert!(Dataset::from_arrays(array![[1.0]], array![1.0, 2.0], TaskKind::Regression).is_err());
        assert!(Dataset::new(
            array![[1.0, 2.0]],
            array![1.0],
            vec!["a".into(), "a".into()],
            TaskKind::Regression
        )
        .is_err());
        assert!(Dataset::from_arrays(array![[1.0]], array![0.5], TaskKind::Classification).is_err());
        assert!(Dataset::from_arrays(array![[f64::NAN]], array![1.0], TaskKind::Regression).is_err());
    }

    #[test]
    fn folds_leave_one_out() {
        let plan = make_folds(4, 4, 3).unwrap();
        assert!(plan.is_leave_one_out());
        assert_eq!(plan.sizes(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn folds_balanced() {
        let plan = make_folds(10, 3, 11).unwrap();
        let mut sizes = plan.sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 4]);
    }

    #[test]
    fn folds_deterministic() {
        assert_eq!(make_folds(37, 5, 9).unwrap(), make_folds(37, 5, 9).unwrap());
        assert_ne!(make_folds(37, 5, 9).unwrap(), make_folds(37, 5, 10).unwrap());
    }

    #[test]
    fn folds_bad_k() {
        assert!(make_folds(5, 1, 0).is_err());
        assert!(make_folds(5, 6, 0).is_err());
    }

    #[test]
    fn stratified_folds_spread_classes() {
        let labels = Array1::from_iter((0..20).map(|i| if i < 8 { 1.0 } else { -1.0 }));
        let plan = make_stratified_folds(labels.view(), 4, 5).unwrap();
        for f in 0..4 {
            let positives = plan
                .validation_indices(f)
                .iter()
                .filter(|&&i| labels[i] > 0.0)
                .count();
            assert_eq!(positives, 2);
        }
    }

    #[test]
    fn hyperparams_reject_negative_and_nan() {
        assert!(HyperParams::new(-1.0, 0.0, 0.0).is_err());
        assert!(HyperParams::new(0.0, f64::NAN, 0.0).is_err());
        assert!(HyperParams::new(0.0, 0.0, f64::INFINITY).is_err());
        assert!(HyperParams::new(0.1, 0.0, 1.0).is_ok());
    }

    #[test]
    fn prediction_examples() {
        let hp = HyperParams::new(0.0, 0.0, 0.0).unwrap();
        let centering = CenteringTransform {
            feature_means: array![1.0, 2.0, 3.0],
            response_mean: 0.25,
        };
        let zero = LinearModel::zero(centering, hp);
        assert_eq!(zero.predict(array![9.0, -4.0, 1.0].view()).unwrap(), 0.25);

        let e1 = LinearModel::new(array![1.0, 0.0, 0.0], CenteringTransform::zeros(3), hp, true).unwrap();
        assert_eq!(e1.support(), &[0]);
        assert_eq!(e1.predict(array![3.0, 5.0, 7.0].view()).unwrap(), 3.0);
        assert!(e1.predict(array![3.0].view()).is_err());

        // all-positive training labels: the mean point scores ȳ = +1
        let d = Dataset::from_arrays(array![[1.0], [3.0]], array![1.0, 1.0], TaskKind::Classification)
            .unwrap();
        let t = fit_centering(&d).unwrap();
        let m = LinearModel::new(array![0.7], t.clone(), hp, true).unwrap();
        assert_eq!(sign_label(m.predict(t.feature_means.view()).unwrap()), 1.0);
    }

    proptest! {
        #[test]
        fn centering_round_trip(
            rows in 1usize..12,
            cols in 1usize..6,
            seed in any::<u64>(),
        ) {
            let mut rng = SeededRng::new(seed);
            let x = Array2::from_shape_fn((rows, cols), |_| rng.uniform_in(-50.0, 50.0));
            let y = Array1::from_shape_fn(rows, |_| rng.uniform_in(-10.0, 10.0));
            let t = CenteringTransform::fit(x.view(), y.view()).unwrap();
            let (xc, yc) = t.apply(x.view(), Some(y.view())).unwrap();
            for col in xc.columns() {
                prop_assert!(col.mean().unwrap().abs() <= 1e-10);
            }
            prop_assert!(yc.unwrap().mean().unwrap().abs() <= 1e-10);
        }

        #[test]
        fn folds_partition(n in 2usize..60, k_frac in 0.0f64..1.0, seed in any::<u64>()) {
            let k = 2 + ((n - 2) as f64 * k_frac) as usize;
            let plan = make_folds(n, k, seed).unwrap();
            let mut seen = vec![0; n];
            for f in 0..k {
                let idx = plan.validation_indices(f);
                prop_assert!(!idx.is_empty());
                for i in idx {
                    seen[i] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            let sizes = plan.sizes();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }
}
