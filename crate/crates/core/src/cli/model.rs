//! On-disk form of a trained model: the support weights with their feature
//! ids and centering means, plus the response mean.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::{CenteringTransform, HyperParams, LinearModel, TaskKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportWeight {
    pub feature: String,
    pub weight: f64,
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub task: TaskKind,
    pub hyperparams: HyperParams,
    pub converged: bool,
    pub response_mean: f64,
    /// Every feature the model was trained on, in training column order.
    pub feature_ids: Vec<String>,
    /// Nonzero weights in training column order.
    pub support: Vec<SupportWeight>,
}

impl ModelFile {
    pub fn from_model(model: &LinearModel, feature_ids: &[String], task: TaskKind) -> Self {
        let means = &model.centering().feature_means;
        let w = model.weights();
        Self {
            task,
            hyperparams: model.hyperparams(),
            converged: model.converged(),
            response_mean: model.centering().response_mean,
            feature_ids: feature_ids.to_vec(),
            support: model
                .support()
                .iter()
                .map(|&j| SupportWeight {
                    feature: feature_ids[j].clone(),
                    weight: w[j],
                    mean: means[j],
                })
                .collect(),
        }
    }

    /// Model over `feature_ids`; off-support weights and means are zero.
    pub fn to_model(&self) -> Result<LinearModel, CliError> {
        let p = self.feature_ids.len();
        let mut weights = Array1::zeros(p);
        let mut means = Array1::zeros(p);
        for s in &self.support {
            let j = self
                .feature_ids
                .iter()
                .position(|f| *f == s.feature)
                .ok_or_else(|| CliError::Data(format!("model support feature '{}' not in its feature list", s.feature)))?;
            weights[j] = s.weight;
            means[j] = s.mean;
        }
        let centering = CenteringTransform {
            feature_means: means,
            response_mean: self.response_mean,
        };
        LinearModel::new(weights, centering, self.hyperparams, self.converged).map_err(CliError::from)
    }

    /// Support ids sorted by decreasing weight magnitude; ties keep
    /// training column order.
    pub fn support_by_magnitude(&self) -> Vec<&SupportWeight> {
        let mut s: Vec<&SupportWeight> = self.support.iter().collect();
        s.sort_by(|a, b| b.weight.abs().total_cmp(&a.weight.abs()));
        s
    }
}
