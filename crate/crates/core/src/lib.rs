//! Two-stage elastic-net feature selection for sparse linear models.
//!
//! Stage I picks a minimal feature set by cross-validating the ℓ¹ weight τ and
//! a debiasing ridge weight λ at a small ℓ² weight μ. Stage II keeps (τ, λ)
//! fixed and sweeps μ upward, producing nested feature lists that gradually
//! admit features correlated with the minimal set.

pub mod analysis;
pub mod cli;
pub mod data;
pub mod error;
pub mod pipeline;
pub mod random;
pub mod solver;
pub mod synth;

pub use data::{
    apply_centering, fit_centering, make_folds, make_stratified_folds, predict, CenteredData,
    CenteringTransform, Dataset, FoldPlan, HyperParams, LinearModel, TaskKind,
};
pub use error::{Error, Result};
pub use solver::{
    cascade_path, cascade_solve, elastic_net_solve, estimate_step_bound, kkt_residual,
    ridge_solve, soft_threshold, IterationConfig, SolveReport, StepBound,
};
