//! Cost-weighted L2-regularized linear classifiers (logistic and hinge
//! loss), scoring and posterior threshold tuning.

mod dataset;
mod objective;
mod optimize;
mod threshold;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dataset::{Dataset, Labels, SparseRow, DEFAULT_BIAS};
pub use objective::{objective_and_gradient, LossKind};
pub use optimize::{train_weighted_linear, train_with_trace, Solver, TrainConfig, TrainOutcome, TrainStatus};
pub use threshold::{threshold_candidates, tune_threshold, ThresholdChoice, ThresholdObjective};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("dataset is not binary")]
    NotBinary,
    #[error("dataset is not multilabel")]
    NotMultilabel,
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("costs ({cost_fn}, {cost_fp}) must be finite, non-negative and not both zero")]
    InvalidCosts { cost_fn: f64, cost_fp: f64 },
    #[error("regularization C = {0} must be positive")]
    InvalidRegularization(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite objective or score encountered")]
    NonFinite,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
}

/// Linear decision rule: class 1 iff `<weights, x> >= threshold`, where the
/// last weight multiplies the bias feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub threshold: f64,
    pub loss: LossKind,
    pub cost_fn: f64,
    pub cost_fp: f64,
    /// Level `t` of the cost vector the costs were derived from.
    pub trained_cost: Option<f64>,
    pub c: f64,
    pub status: TrainStatus,
    pub iterations: usize,
    pub objective: f64,
}

impl LinearModel {
    /// Rule that predicts class 2 everywhere.
    pub fn always_negative(dim: usize, loss: LossKind) -> Self {
        LinearModel {
            weights: vec![0.0; dim + 1],
            threshold: 1.0,
            loss,
            cost_fn: 0.0,
            cost_fp: 0.0,
            trained_cost: None,
            c: 0.0,
            status: TrainStatus::Trivial,
            iterations: 0,
            objective: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len().saturating_sub(1)
    }
}

/// `<weights, x_i>` for every example, bias included.
///
/// The dataset may have fewer features than the model (features unseen in
/// training are absent), but not more.
pub fn predict_scores(model: &LinearModel, ds: &Dataset) -> Result<Vec<f64>, LearnError> {
    if model.weights.is_empty() || ds.dim() > model.dim() {
        return Err(LearnError::DimensionMismatch { expected: model.dim(), found: ds.dim() });
    }
    let d = model.dim();
    let bias_w = model.weights[d];
    Ok(ds
        .rows()
        .iter()
        .map(|row| row.iter().fold(bias_w * ds.bias(), |s, &(j, v)| s + model.weights[j as usize - 1] * v))
        .collect())
}

/// Class per example (1 or 2) under the model's threshold.
pub fn predict(model: &LinearModel, ds: &Dataset) -> Result<Vec<usize>, LearnError> {
    Ok(predict_scores(model, ds)?
        .into_iter()
        .map(|s| if s >= model.threshold { 1 } else { 2 })
        .collect())
}
