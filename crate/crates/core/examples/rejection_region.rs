//! Classify with a debiased sparse model and report the score interval that
//! contains every misclassified test sample.

use l1l2::analysis::rejection_region;
use l1l2::pipeline::{evaluate, stage1_grid_search, train_classifier, GridSpec, SolveStrategy};
use l1l2::synth::{as_classification, generate_grouped_toy, GroupedToySpec};
use l1l2::{make_stratified_folds, HyperParams, IterationConfig};

fn main() -> l1l2::Result<()> {
    let toy = generate_grouped_toy(&GroupedToySpec {
        n: 160,
        response_noise_sigma: 4.0,
        seed: 9,
        ..Default::default()
    })?;
    let data = as_classification(&toy.data)?;
    let train = data.subset(&(0..100).collect::<Vec<_>>());
    let test = data.subset(&(100..160).collect::<Vec<_>>());

    let grid = GridSpec {
        stage1_strategy: SolveStrategy::Direct,
        ..GridSpec::default_for(&train)?
    };
    let grid = GridSpec {
        tau_values: grid.tau_values.iter().copied().step_by(3).collect(),
        ..grid
    };
    let folds = make_stratified_folds(train.responses(), 5, 9)?;
    let config = IterationConfig::default();
    let cv = stage1_grid_search(&train, &grid, &folds, &config)?;
    let model = train_classifier(&train, HyperParams::new(cv.tau_opt, grid.mu_stage1, cv.lambda_opt)?, &config)?;
    println!("{} features selected; test errors {:?}", model.cardinality(), evaluate(&model, &test)?);

    let scores = model.predict_many(test.samples())?;
    let region = rejection_region(scores.view(), test.responses())?;
    println!(
        "{:?} region [{:.3}, {:.3}] rejects {} samples ({:.0}% of predicted -1, {:.0}% of predicted +1)",
        region.shape,
        region.lower,
        region.upper,
        region.n_rejected,
        100.0 * region.rejected_predicted_negative,
        100.0 * region.rejected_predicted_positive
    );
    Ok(())
}
