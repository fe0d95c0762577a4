//! Seeded synthetic problems: a sparse high-dimensional regression toy and a
//! grouped-correlation toy with three latent factors.
//!
//! Both generators draw from [`SeededRng`] in a fixed order so datasets can be
//! regenerated bit-exactly from a seed.

use ndarray::{Array1, Array2};

use crate::data::{sign_label, Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::random::SeededRng;

/// One fixed draw of the three nonzero weights of the regression toy.
pub const REFERENCE_TOY_WEIGHTS: [f64; 3] = [0.6449, 0.8180, 0.6602];

/// Number of latent factors in the grouped toy.
pub const LATENT_GROUPS: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct ToyRegressionSpec {
    pub n_train: usize,
    pub n_validation: usize,
    pub p: usize,
    /// Pinned values for the first three weights; drawn uniformly from
    /// `[0.5, 1]` when absent.
    pub true_weights: Option<[f64; 3]>,
    pub noise_sigma: f64,
    pub input_range: (f64, f64),
    pub seed: u64,
}

impl Default for ToyRegressionSpec {
    fn default() -> Self {
        Self {
            n_train: 50,
            n_validation: 1000,
            p: 1000,
            true_weights: None,
            noise_sigma: 0.5,
            input_range: (-1.0, 1.0),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ToyRegression {
    pub train: Dataset,
    pub validation: Dataset,
    pub truth: Array1<f64>,
}

/// `y = x·β* + ε` with inputs i.i.d. uniform on `input_range` and Gaussian
/// noise. Draw order: the three weights (if not pinned), then for each
/// training row its `p` inputs followed by one noise draw, then the same for
/// validation rows.
pub fn generate_toy_regression(spec: &ToyRegressionSpec) -> Result<ToyRegression> {
    let (lo, hi) = spec.input_range;
    if spec.p < 3 {
        return Err(Error::InvalidParameter("toy regression needs p >= 3".into()));
    }
    if spec.n_train == 0 || spec.n_validation == 0 {
        return Err(Error::InvalidParameter("sample counts must be positive".into()));
    }
    if !(lo < hi) || !(spec.noise_sigma >= 0.0) {
        return Err(Error::InvalidParameter("invalid input range or noise level".into()));
    }
    let mut rng = SeededRng::new(spec.seed);
    let weights = match spec.true_weights {
        Some(w) => {
            if w.iter().any(|&v| v == 0.0 || !v.is_finite()) {
                return Err(Error::InvalidParameter("pinned weights must be finite and nonzero".into()));
            }
            w
        }
        None => [
            rng.uniform_in(0.5, 1.0),
            rng.uniform_in(0.5, 1.0),
            rng.uniform_in(0.5, 1.0),
        ],
    };
    let mut truth = Array1::zeros(spec.p);
    for (j, w) in weights.iter().enumerate() {
        truth[j] = *w;
    }

    let mut draw = |n: usize| -> Result<Dataset> {
        let mut x = Array2::zeros((n, spec.p));
        let mut y = Array1::zeros(n);
        for i in 0..n {
            for j in 0..spec.p {
                x[[i, j]] = rng.uniform_in(lo, hi);
            }
            let noise = rng.standard_normal();
            y[i] = (0..3).map(|j| x[[i, j]] * weights[j]).sum::<f64>() + spec.noise_sigma * noise;
        }
        Dataset::from_arrays(x, y, TaskKind::Regression)
    };
    let train = draw(spec.n_train)?;
    let validation = draw(spec.n_validation)?;
    Ok(ToyRegression {
        train,
        validation,
        truth,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupedToySpec {
    pub n: usize,
    pub within_group_noise_sigma: f64,
    pub group_size: usize,
    pub n_noise_features: usize,
    /// Additive Gaussian noise on the response; zero gives `y = Σ x_j` exactly.
    pub response_noise_sigma: f64,
    pub seed: u64,
}

impl Default for GroupedToySpec {
    fn default() -> Self {
        Self {
            n: 100,
            within_group_noise_sigma: 0.01,
            group_size: 5,
            n_noise_features: 25,
            response_noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl GroupedToySpec {
    pub fn n_features(&self) -> usize {
        LATENT_GROUPS * self.group_size + self.n_noise_features
    }
}

#[derive(Clone, Debug)]
pub struct GroupedToy {
    pub data: Dataset,
    /// Column indices of the correlated groups driven by each latent factor.
    pub relevant_groups: Vec<Vec<usize>>,
    /// Independent standard-normal columns with zero true weight.
    pub noise_features: Vec<usize>,
}

impl GroupedToy {
    /// One on every grouped column, zero on the noise columns.
    pub fn true_weights(&self) -> Array1<f64> {
        let mut w = Array1::zeros(self.data.n_features());
        for &j in self.relevant_groups.iter().flatten() {
            w[j] = 1.0;
        }
        w
    }
}

/// Group `g` holds columns `g·s .. (g+1)·s` equal to `Z_g + ε` with
/// `Z_g ~ N(0, 1)` and `ε ~ N(0, σ_w²)`; the trailing columns are i.i.d.
/// `N(0, 1)`. The response is the sum of all grouped columns plus optional
/// noise. Draw order per row: the three latents, the grouped noise terms in
/// column order, the noise columns, then one response-noise draw.
pub fn generate_grouped_toy(spec: &GroupedToySpec) -> Result<GroupedToy> {
    if spec.n == 0 || spec.group_size == 0 {
        return Err(Error::InvalidParameter("n and group_size must be positive".into()));
    }
    if !(spec.within_group_noise_sigma >= 0.0) || !(spec.response_noise_sigma >= 0.0) {
        return Err(Error::InvalidParameter("noise levels must be >= 0".into()));
    }
    let grouped = LATENT_GROUPS * spec.group_size;
    let p = spec.n_features();
    let mut rng = SeededRng::new(spec.seed);
    let mut x = Array2::zeros((spec.n, p));
    let mut y = Array1::zeros(spec.n);
    for i in 0..spec.n {
        let latents: [f64; LATENT_GROUPS] = std::array::from_fn(|_| rng.standard_normal());
        for j in 0..grouped {
            let eps = spec.within_group_noise_sigma * rng.standard_normal();
            x[[i, j]] = latents[j / spec.group_size] + eps;
        }
        for j in grouped..p {
            x[[i, j]] = rng.standard_normal();
        }
        let noise = rng.standard_normal();
        y[i] = (0..grouped).map(|j| x[[i, j]]).sum::<f64>() + spec.response_noise_sigma * noise;
    }
    let relevant_groups = (0..LATENT_GROUPS)
        .map(|g| (g * spec.group_size..(g + 1) * spec.group_size).collect())
        .collect();
    let noise_features = (grouped..p).collect();
    Ok(GroupedToy {
        data: Dataset::from_arrays(x, y, TaskKind::Regression)?,
        relevant_groups,
        noise_features,
    })
}

/// Same samples with responses replaced by their sign (zero maps to +1).
pub fn as_classification(data: &Dataset) -> Result<Dataset> {
    let labels = data.responses().mapv(sign_label);
    Dataset::with_sample_ids(
        data.samples().to_owned(),
        labels,
        data.feature_ids().to_vec(),
        data.sample_ids().to_vec(),
        TaskKind::Classification,
    )
}
