//! Family of nested gene lists indexed by the correlation parameter, and how
//! stable each list is across cross-validation folds.

use l1l2::analysis::{nesting_overlap, selection_frequency};
use l1l2::pipeline::{
    dataset_tau_max, default_mu_sweep, lambda_grid, stage1_grid_search, stage2_sweep, sweep_fold_supports,
    tau_grid, GridSpec, SolveStrategy, SweepMode,
};
use l1l2::synth::{generate_grouped_toy, GroupedToySpec};
use l1l2::{make_folds, IterationConfig};

fn main() -> l1l2::Result<()> {
    let data = generate_grouped_toy(&GroupedToySpec {
        within_group_noise_sigma: 0.15,
        group_size: 10,
        response_noise_sigma: 2.0,
        n_noise_features: 170,
        seed: 1,
        ..Default::default()
    })?
    .data;
    let grid = GridSpec {
        tau_values: tau_grid(dataset_tau_max(&data)?, 12, 0.05),
        lambda_values: lambda_grid(1e-6, 1e1, 6),
        stage1_strategy: SolveStrategy::Direct,
        ..GridSpec::default_for(&data)?
    };
    let folds = make_folds(data.n_samples(), 10, 1)?;
    let config = IterationConfig::default();
    let cv = stage1_grid_search(&data, &grid, &folds, &config)?;
    println!("tau* = {:.4}, lambda* = {:.1e}", cv.tau_opt, cv.lambda_opt);

    for mode in [SweepMode::Cascade, SweepMode::Independent] {
        let sweep = stage2_sweep(&data, None, &cv, &grid, &config, mode)?;
        let report = nesting_overlap(&sweep.supports())?;
        println!(
            "{mode:?}: sizes {:?}, mean overlap {:.1}%, perfectly nested {}",
            report.cardinalities,
            report.mean_overlap(),
            report.perfectly_nested()
        );
    }

    let mus = default_mu_sweep();
    let per_mu = sweep_fold_supports(&data, &folds, cv.tau_opt, &mus, SweepMode::Cascade, &config)?;
    println!("{:>9} {:>7} {:>7}  cumulative (>= 10%, 20%, ..., 100% of folds)", "mu", "mean", "always");
    for (mu, supports) in mus.iter().zip(&per_mu) {
        let r = selection_frequency(supports, data.n_features())?;
        println!("{mu:>9.1e} {:>7.1} {:>7}  {:?}", r.mean_support_size, r.always_selected(), r.cumulative);
    }
    Ok(())
}
