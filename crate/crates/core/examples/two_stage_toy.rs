//! LASSO alone against LASSO followed by a least-squares refit on its
//! support, on the three-relevant-variable regression toy.

use l1l2::pipeline::{dataset_tau_max, tau_grid, validation_curve};
use l1l2::synth::{generate_toy_regression, ToyRegressionSpec, REFERENCE_TOY_WEIGHTS};
use l1l2::IterationConfig;

fn main() -> l1l2::Result<()> {
    let spec = ToyRegressionSpec {
        true_weights: Some(REFERENCE_TOY_WEIGHTS),
        seed: 5,
        ..Default::default()
    };
    let toy = generate_toy_regression(&spec)?;
    println!(
        "train {}x{}, validation {} samples, truth {:?}",
        toy.train.n_samples(),
        toy.train.n_features(),
        toy.validation.n_samples(),
        &toy.truth.as_slice().unwrap()[..3]
    );
    let taus = tau_grid(dataset_tau_max(&toy.train)?, 40, 0.05);
    let config = IterationConfig::default();
    let lasso = validation_curve(&toy.train, &toy.validation, &taus, 0.0, None, &config)?;
    let refit = validation_curve(&toy.train, &toy.validation, &taus, 0.0, Some(0.0), &config)?;

    println!("{:>9} {:>12} {:>12} {:>6}", "tau", "lasso mse", "refit mse", "|S|");
    for (i, tau) in taus.iter().enumerate().step_by(4) {
        let size = lasso.models[i].as_ref().map_or(0, |m| m.cardinality());
        let show = |e: Option<f64>| e.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!("{tau:>9.4} {:>12} {:>12} {size:>6}", show(lasso.errors[i]), show(refit.errors[i]));
    }
    let (li, ri) = (lasso.argmin().unwrap(), refit.argmin().unwrap());
    let best = refit.models[ri].as_ref().unwrap();
    println!("lasso: best tau {:.4}, mse {:.4}", taus[li], lasso.errors[li].unwrap());
    println!(
        "two-stage: best tau {:.4}, mse {:.4}, support {:?}, weights {:?}",
        taus[ri],
        refit.errors[ri].unwrap(),
        best.support(),
        best.support().iter().map(|&j| format!("{:.3}", best.weights()[j])).collect::<Vec<_>>()
    );
    Ok(())
}
