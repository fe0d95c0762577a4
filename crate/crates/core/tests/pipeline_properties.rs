mod common;

use common::*;
use l1l2::pipeline::*;
use l1l2::random::SeededRng;
use l1l2::synth::{as_classification, generate_grouped_toy, GroupedToySpec};
use l1l2::data::sign_label;
use l1l2::*;
use ndarray::{Array1, Array2};

fn regression_data(n: usize, p: usize, seed: u64) -> Dataset {
    let (x, y) = random_problem(n, p, seed);
    Dataset::from_arrays(x, y, TaskKind::Regression).unwrap()
}

fn small_grid(data: &Dataset) -> GridSpec {
    GridSpec {
        tau_values: tau_grid(dataset_tau_max(data).unwrap(), 8, 0.05),
        lambda_values: lambda_grid(1e-6, 1.0, 4),
        stage1_strategy: SolveStrategy::Direct,
        ..GridSpec::default_for(data).unwrap()
    }
}

#[test]
fn cardinality_shrinks_as_tau_grows() {
    let cfg = IterationConfig::default();
    for seed in 0..5 {
        let data = regression_data(60, 20, 500 + seed);
        let taus = tau_grid(dataset_tau_max(&data).unwrap(), 25, 0.01);
        let sizes: Vec<usize> = taus
            .iter()
            .map(|&t| fit_elastic_net(&data, HyperParams::new(t, 0.0, 0.0).unwrap(), &cfg).unwrap().cardinality())
            .collect();
        // taus are descending, so sizes should be non-decreasing up to ties.
        for w in sizes.windows(2) {
            assert!(w[1] + 1 >= w[0], "seed {seed}: sizes {sizes:?}");
        }
        assert!(sizes[0] <= 1, "{sizes:?}");
    }
}

#[test]
fn validation_rows_never_influence_their_own_split() {
    let data = regression_data(40, 15, 600);
    let folds = make_folds(40, 4, 3).unwrap();
    let grid = small_grid(&data);
    let cfg = IterationConfig::default();
    let base = stage1_grid_search(&data, &grid, &folds, &cfg).unwrap();

    let held_out = folds.validation_indices(2);
    let mut x = data.samples().to_owned();
    let mut y = data.responses().to_owned();
    let mut rng = SeededRng::new(1);
    for &i in &held_out {
        x.row_mut(i).mapv_inplace(|v| v * 50.0 + 100.0);
        y[i] = 1e3 * rng.standard_normal();
    }
    let poisoned = Dataset::from_arrays(x, y, TaskKind::Regression).unwrap();
    let grid = GridSpec {
        tau_values: base.tau_values.clone(),
        ..grid
    };
    let other = stage1_grid_search(&poisoned, &grid, &folds, &cfg).unwrap();
    for t in 0..grid.tau_values.len() {
        assert_eq!(base.support(t, 2), other.support(t, 2));
    }

    let model = fold_model(&data, &folds, 2, HyperParams::new(base.tau_opt, 1e-6, base.lambda_opt).unwrap(), &cfg, &SolveStrategy::Direct).unwrap();
    let train_rows = folds.training_indices(2);
    for j in 0..data.n_features() {
        let mean = train_rows.iter().map(|&i| data.samples()[[i, j]]).sum::<f64>() / train_rows.len() as f64;
        assert!((model.centering().feature_means[j] - mean).abs() < 1e-12);
    }
}

#[test]
fn grid_search_is_bit_reproducible() {
    let data = regression_data(30, 20, 700);
    let grid = small_grid(&data);
    let cfg = IterationConfig::default();
    let folds = make_folds(30, 5, 9).unwrap();
    let a = stage1_grid_search(&data, &grid, &folds, &cfg).unwrap();
    let b = stage1_grid_search(&data, &grid, &folds, &cfg).unwrap();
    assert_eq!(a, b);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let c = pool.install(|| stage1_grid_search(&data, &grid, &folds, &cfg).unwrap());
    assert_eq!(a, c);
}

#[test]
fn predictions_follow_a_shift_of_the_inputs() {
    let data = regression_data(30, 12, 800);
    let shift: Array1<f64> = (0..12).map(|j| 3.0 * j as f64 - 7.0).collect();
    let shifted = Dataset::from_arrays(&data.samples() + &shift, data.responses().to_owned(), TaskKind::Regression).unwrap();
    let params = HyperParams::new(0.05, 1e-3, 1e-2).unwrap();
    let cfg = IterationConfig::default().with_kkt_tolerance(1e-11);
    let a = train_classifier(&data, params, &cfg).unwrap();
    let b = train_classifier(&shifted, params, &cfg).unwrap();
    let test = regression_data(10, 12, 801);
    let pa = a.predict_many(test.samples()).unwrap();
    let pb = b.predict_many((&test.samples() + &shift).view()).unwrap();
    for (u, v) in pa.iter().zip(pb.iter()) {
        assert!((u - v).abs() <= 1e-8 * u.abs().max(1.0), "{u} vs {v}");
    }
}

#[test]
fn separable_classes_reach_zero_validation_error() {
    let mut rng = SeededRng::new(4);
    let (n, p) = (60, 20);
    let mut x = Array2::zeros((n, p));
    let mut i = 0;
    while i < n {
        let row: Vec<f64> = (0..p).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        // Keep a margin around the separating hyperplane.
        if (row[0] + row[1] - row[2]).abs() > 0.3 {
            x.row_mut(i).assign(&Array1::from(row));
            i += 1;
        }
    }
    let y: Array1<f64> = x.rows().into_iter().map(|r| sign_label(r[0] + r[1] - r[2])).collect();
    let data = Dataset::from_arrays(x, y, TaskKind::Classification).unwrap();
    let folds = make_stratified_folds(data.responses(), 5, 1).unwrap();
    let grid = GridSpec {
        tau_values: tau_grid(dataset_tau_max(&data).unwrap(), 15, 0.005),
        lambda_values: lambda_grid(1e-8, 1e-2, 4),
        stage1_strategy: SolveStrategy::Direct,
        ..GridSpec::default_for(&data).unwrap()
    };
    let cv = stage1_grid_search(&data, &grid, &folds, &IterationConfig::default()).unwrap();
    assert_eq!(cv.min_error(), Some(0.0));
}

#[test]
fn test_error_is_stable_across_the_mu_sweep() {
    let cfg = IterationConfig::default();
    for seed in 0..3 {
        let toy = generate_grouped_toy(&GroupedToySpec {
            n: 150,
            response_noise_sigma: 1.0,
            seed,
            ..Default::default()
        })
        .unwrap();
        let data = as_classification(&toy.data).unwrap();
        let train = data.subset(&(0..100).collect::<Vec<_>>());
        let test = data.subset(&(100..150).collect::<Vec<_>>());
        let grid = small_grid(&train);
        let folds = make_folds(100, 5, seed).unwrap();
        let cv = stage1_grid_search(&train, &grid, &folds, &cfg).unwrap();
        let sweep = stage2_sweep(&train, Some(&test), &cv, &grid, &cfg, SweepMode::Cascade).unwrap();
        let errors: Vec<f64> = sweep.test_errors.unwrap().iter().map(|e| e.value()).collect();
        let spread = errors.iter().copied().fold(f64::MIN, f64::max) - errors.iter().copied().fold(f64::MAX, f64::min);
        assert!(spread <= 2.0, "seed {seed}: {errors:?}");
    }
}

#[test]
fn sweep_supports_grow_with_mu() {
    let data = generate_grouped_toy(&grouped_correlation_spec(3)).unwrap().data;
    let grid = GridSpec {
        tau_values: vec![0.3 * dataset_tau_max(&data).unwrap()],
        lambda_values: vec![1e-6],
        mu_sweep: vec![1e-6, 1e-4, 1e-2, 1.0, 10.0],
        stage1_strategy: SolveStrategy::Direct,
        ..GridSpec::default_for(&data).unwrap()
    };
    let cfg = IterationConfig::default();
    let cv = stage1_grid_search(&data, &grid, &make_folds(100, 5, 0).unwrap(), &cfg).unwrap();
    let sweep = stage2_sweep(&data, None, &cv, &grid, &cfg, SweepMode::Cascade).unwrap();
    assert!(sweep.all_converged());
    let sizes: Vec<usize> = sweep.models.iter().map(|m| m.cardinality()).collect();
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]), "{sizes:?}");
    assert!(sizes.last().unwrap() > &sizes[0], "{sizes:?}");
}
