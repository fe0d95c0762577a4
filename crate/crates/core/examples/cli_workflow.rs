//! The file-based workflow driven through the command-line entry point:
//! generate data, run the two-stage experiment, then score new samples.

use std::path::Path;

use l1l2::cli::run_cli;

fn l1l2(args: &[&str]) {
    println!("$ l1l2 {}", args.join(" "));
    let code = run_cli(std::iter::once("l1l2").chain(args.iter().copied()));
    assert_eq!(code, 0, "command failed");
}

fn main() -> std::io::Result<()> {
    let root = std::env::temp_dir().join("l1l2-cli-workflow");
    let _ = std::fs::remove_dir_all(&root);
    let dir = |name: &str| root.join(name).to_string_lossy().into_owned();

    l1l2(&["synth", "grouped-toy", "--classification", "--seed", "2", "--noise-sigma", "1", "--out", &dir("data")]);
    let config = root.join("experiment.json");
    std::fs::write(
        &config,
        format!(
            r#"{{"task": "classification", "train": "{}", "labels": "{}", "test_fraction": 0.3,
  "seed": 2, "folds": 5, "grid": {{"tau_count": 10, "lambda_count": 4}}}}"#,
            dir("data/matrix.tsv"),
            dir("data/labels.tsv")
        ),
    )?;
    l1l2(&["run", "--config", &config.to_string_lossy(), "--out", &dir("run")]);

    let model = dir("run/models/mu_00.json");
    l1l2(&["predict", "--model", &model, "--matrix", &dir("data/matrix.tsv"), "--out", &dir("scores.tsv")]);
    l1l2(&["heatmap-export", "--model", &model, "--matrix", &dir("data/matrix.tsv"), "--out", &dir("heatmap.tsv")]);

    for file in ["run/manifest.json", "run/nesting.json", "scores.tsv"] {
        let text = std::fs::read_to_string(Path::new(&root).join(file))?;
        println!("--- {file} (first lines)");
        text.lines().take(8).for_each(|l| println!("{l}"));
    }
    Ok(())
}
