mod common;

use common::{coordinate_descent, least_squares, max_abs_diff, random_problem, ridge_closed_form, tau_max};
use l1l2::random::SeededRng;
use l1l2::solver::{cascade_path, cascade_solve, default_cascade_schedule};
use l1l2::{elastic_net_solve, kkt_residual, ridge_solve, HyperParams, IterationConfig};
use ndarray::{concatenate, Array1, Axis};

fn tight() -> IterationConfig {
    IterationConfig::default().with_kkt_tolerance(1e-11)
}

#[test]
fn landweber_limit_is_least_squares() {
    let (x, y) = random_problem(10, 3, 1);
    let params = HyperParams::new(0.0, 0.0, 0.0).unwrap();
    let r = elastic_net_solve(x.view(), y.view(), &params, &tight()).unwrap();
    assert!(r.converged);
    let ls = least_squares(&x, &y);
    assert!(max_abs_diff(r.solution.as_slice().unwrap(), &ls) <= 1e-6);
}

#[test]
fn matches_coordinate_descent() {
    let (x, y) = random_problem(20, 8, 2);
    let params = HyperParams::new(0.5, 0.1, 0.0).unwrap();
    let r = elastic_net_solve(x.view(), y.view(), &params, &tight()).unwrap();
    let cd = coordinate_descent(&x, &y, 0.5, 0.1, 1e-12);
    assert!(max_abs_diff(r.solution.as_slice().unwrap(), &cd) <= 1e-6);
    let cd_kkt = kkt_residual(x.view(), y.view(), &params, Array1::from(cd).view()).unwrap();
    assert!(cd_kkt <= 1e-8, "{cd_kkt}");
}

#[test]
fn converged_solutions_are_kkt_certified() {
    for seed in 0..10 {
        let (x, y) = random_problem(25, 10, 100 + seed);
        let tmax = tau_max(&x, &y);
        let params = HyperParams::new(0.2 * tmax, 1e-3, 0.0).unwrap();
        let r = elastic_net_solve(x.view(), y.view(), &params, &IterationConfig::default()).unwrap();
        assert!(r.converged);
        assert!(r.kkt_residual <= 1e-5);
        let recomputed = kkt_residual(x.view(), y.view(), &params, r.solution.view()).unwrap();
        assert!((recomputed - r.kkt_residual).abs() < 1e-10);
    }
}

#[test]
fn fixed_point_property() {
    let (x, y) = random_problem(30, 12, 3);
    let params = HyperParams::new(0.1, 0.01, 0.0).unwrap();
    let r = elastic_net_solve(x.view(), y.view(), &params, &tight()).unwrap();
    // one more application of the map from the converged point
    let again = IterationConfig::default()
        .with_initial_point(r.solution.clone())
        .with_max_iterations(1);
    let step = elastic_net_solve(x.view(), y.view(), &params, &again).unwrap();
    for (a, b) in r.solution.iter().zip(step.solution.iter()) {
        assert!((a - b).abs() <= 0.1 * a.abs() + 1e-12);
    }
}

#[test]
fn contraction_from_two_starts() {
    let (x, y) = random_problem(20, 15, 4);
    let params = HyperParams::new(0.05, 0.05, 0.0).unwrap();
    let mut rng = SeededRng::new(9);
    let a = Array1::from_shape_fn(15, |_| rng.uniform_in(-5.0, 5.0));
    let b = Array1::from_shape_fn(15, |_| rng.uniform_in(-5.0, 5.0));
    let cfg = IterationConfig::default().with_kkt_tolerance(1e-12);
    let ra = elastic_net_solve(x.view(), y.view(), &params, &cfg.clone().with_initial_point(a)).unwrap();
    let rb = elastic_net_solve(x.view(), y.view(), &params, &cfg.with_initial_point(b)).unwrap();
    let d = max_abs_diff(ra.solution.as_slice().unwrap(), rb.solution.as_slice().unwrap());
    assert!(d <= 1e-8, "{d}");
}

#[test]
fn pure_ridge_matches_closed_form() {
    let (x, y) = random_problem(20, 8, 5);
    let params = HyperParams::new(0.0, 0.2, 0.0).unwrap();
    let r = elastic_net_solve(x.view(), y.view(), &params, &tight()).unwrap();
    let closed = ridge_closed_form(&x, &y, 0.2);
    assert!(max_abs_diff(r.solution.as_slice().unwrap(), &closed) <= 1e-6);
    // and the debiasing solver agrees on the full design
    let via_ridge = ridge_solve(x.view(), y.view(), 0.2).unwrap();
    assert!(max_abs_diff(via_ridge.as_slice().unwrap(), &closed) <= 1e-10);
}

#[test]
fn duplicated_column_gets_equal_weights() {
    let (x, y) = random_problem(30, 6, 6);
    let dup = concatenate(Axis(1), &[x.view(), x.column(0).insert_axis(Axis(1))]).unwrap();
    let params = HyperParams::new(0.05, 1e-3, 0.0).unwrap();
    let r = elastic_net_solve(dup.view(), y.view(), &params, &IterationConfig::default().with_kkt_tolerance(1e-12))
        .unwrap();
    assert!((r.solution[0] - r.solution[6]).abs() <= 1e-6);
    assert!(r.solution[0] != 0.0);
}

#[test]
fn cascade_single_stage_equals_direct() {
    let (x, y) = random_problem(20, 8, 7);
    let cfg = IterationConfig::default();
    let c = cascade_solve(x.view(), y.view(), 0.3, &[1e-3], &cfg).unwrap();
    let d = elastic_net_solve(x.view(), y.view(), &HyperParams::new(0.3, 1e-3, 0.0).unwrap(), &cfg).unwrap();
    assert_eq!(c, d);
}

#[test]
fn cascade_supports_are_nested_and_close_to_direct() {
    let (x, y) = random_problem(40, 60, 8);
    let tmax = tau_max(&x, &y);
    let tau = 0.1 * tmax;
    let schedule = default_cascade_schedule();
    let path = cascade_path(x.view(), y.view(), tau, &schedule, &IterationConfig::default()).unwrap();
    for w in path.windows(2) {
        let (big, small) = (w[0].support(), w[1].support());
        assert!(small.iter().all(|j| big.contains(j)));
    }
    let last = path.last().unwrap().support();
    let direct = elastic_net_solve(
        x.view(),
        y.view(),
        &HyperParams::new(tau, 1e-6, 0.0).unwrap(),
        &IterationConfig::default(),
    )
    .unwrap()
    .support();
    let agree = last.iter().filter(|j| direct.contains(j)).count();
    let union = last.len() + direct.len() - agree;
    assert!(agree as f64 >= 0.83 * union as f64, "{last:?} vs {direct:?}");
}

#[test]
fn cascade_empty_support_propagates_zero() {
    let (x, y) = random_problem(15, 5, 9);
    let tmax = tau_max(&x, &y);
    let r = cascade_solve(x.view(), y.view(), 1.5 * tmax, &[1e-2, 1e-3, 1e-4], &IterationConfig::default()).unwrap();
    assert!(r.converged);
    assert!(r.solution.iter().all(|&b| b == 0.0));
}
