//! Two-stage selection on correlated groups: a sparse minimal list in the
//! first stage, then growing the correlation parameter recovers each group
//! whole.

use l1l2::analysis::support_recovery_score;
use l1l2::pipeline::{
    dataset_tau_max, fit_elastic_net, holdout_grid_search, stage2_sweep, tau_grid, GridSpec, SolveStrategy,
    SweepMode,
};
use l1l2::synth::{generate_grouped_toy, GroupedToySpec};
use l1l2::{HyperParams, IterationConfig};

fn main() -> l1l2::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let toy = generate_grouped_toy(&GroupedToySpec {
        response_noise_sigma: 1.0,
        seed,
        ..Default::default()
    })?;
    let train = toy.data.subset(&(0..70).collect::<Vec<_>>());
    let validation = toy.data.subset(&(70..100).collect::<Vec<_>>());
    let grid = GridSpec {
        tau_values: tau_grid(dataset_tau_max(&train)?, 15, 0.05),
        stage1_strategy: SolveStrategy::Direct,
        ..GridSpec::default_for(&train)?
    };
    let config = IterationConfig::default();
    let cv = holdout_grid_search(&train, &validation, &grid, &config)?;
    println!("selected tau {:.4}, lambda {:.1e}", cv.tau_opt, cv.lambda_opt);

    let minimal = fit_elastic_net(&toy.data, HyperParams::new(cv.tau_opt, grid.mu_stage1, 0.0)?, &config)?;
    let score = support_recovery_score(minimal.support(), &toy.relevant_groups);
    println!(
        "minimal list {:?}: per group {:?}, {:?}",
        minimal.support(),
        score.per_group,
        score.outcome
    );

    let grid = GridSpec {
        mu_sweep: vec![1e-6, 1e-3, 1e-1, 1.0, 1000.0 * cv.tau_opt],
        ..grid
    };
    let sweep = stage2_sweep(&toy.data, None, &cv, &grid, &config, SweepMode::Cascade)?;
    for (mu, model) in sweep.mu_values.iter().zip(&sweep.models) {
        let s = support_recovery_score(model.support(), &toy.relevant_groups);
        println!(
            "mu {mu:>9.3e}: {:>3} features, per group {:?}, relevant ratio {:.2}",
            model.cardinality(),
            s.per_group,
            s.ratio
        );
    }
    Ok(())
}
