//! Solve a single elastic-net problem with the damped iterative
//! soft-thresholding solver and inspect the result.

use l1l2::random::SeededRng;
use l1l2::solver::{geometric_schedule, tau_max};
use l1l2::{cascade_solve, elastic_net_solve, kkt_residual, HyperParams, IterationConfig};
use ndarray::{Array1, Array2};

fn main() -> l1l2::Result<()> {
    let (n, p) = (40, 200);
    let mut rng = SeededRng::new(7);
    let mut x = Array2::from_shape_fn((n, p), |_| rng.standard_normal());
    for mut col in x.columns_mut() {
        let m = col.mean().unwrap();
        col -= m;
    }
    let truth: Array1<f64> = (0..p).map(|j| if j < 5 { 2.0 } else { 0.0 }).collect();
    let mut y = x.dot(&truth);
    y.mapv_inplace(|v| v + 0.3 * rng.standard_normal());
    y -= y.mean().unwrap();

    let tmax = tau_max(x.view(), y.view());
    println!("tau_max = {tmax:.4}");
    let config = IterationConfig::default();
    for (ratio, mu) in [(0.5, 0.0), (0.1, 0.0), (0.1, 1e-2), (0.02, 1e-2)] {
        let params = HyperParams::new(ratio * tmax, mu, 0.0)?;
        let report = elastic_net_solve(x.view(), y.view(), &params, &config)?;
        let kkt = kkt_residual(x.view(), y.view(), &params, report.solution.view())?;
        println!(
            "tau = {:.4} mu = {mu:<6} iterations {:>5} converged {} kkt {kkt:.1e} support {:?}",
            params.tau,
            report.iterations,
            report.converged,
            report.support()
        );
    }

    // Warm-started continuation from a large mu down to the target.
    let params = HyperParams::new(0.02 * tmax, 1e-4, 0.0)?;
    let direct = elastic_net_solve(x.view(), y.view(), &params, &config)?;
    let schedule = geometric_schedule(1e-1, params.mu, 6);
    let cascade = cascade_solve(x.view(), y.view(), params.tau, &schedule, &config)?;
    println!(
        "direct: {} features in {} iterations; cascade: {} features in {} iterations",
        direct.support().len(),
        direct.iterations,
        cascade.support().len(),
        cascade.iterations
    );
    Ok(())
}
