//! Outer loops over the cost level `t` and the regularization `C`: binary
//! F-beta (and Jaccard), macro F by binary relevance, micro F with per-label
//! cost-based selection, bracketing of the cost interval, and evaluation.

mod binary;
mod bracket;
mod cells;
mod evaluate;
mod grid;
mod multilabel;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learners::{Dataset, LearnError, LinearModel, LossKind, TrainConfig};
use crate::metrics::{MeasureSpec, MetricError};

pub use binary::{compare_thresholding, optimize_binary_f, optimize_macro_f, ThresholdComparison};
pub use bracket::{bracket_interval, BracketOutcome};
pub use evaluate::{evaluate, report_for, EvalReport, LabelReport};
pub use grid::{cost_grid, paper_grid, CostGrid, GridSpec};
pub use multilabel::{optimize_micro_f, MicroOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid cost grid: {0}")]
    InvalidGrid(String),
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("incompatible inputs: {0}")]
    Shape(String),
    #[error("every grid cell failed to train")]
    AllCellsFailed,
    #[error("no grid cell has a defined validation measure")]
    NoEligibleCell,
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Which grid cell wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// Largest validation measure over all `(t, C)`, thresholds tuned for
    /// the measure.
    MaxMeasure,
    /// For each `t` the `C` (and threshold) of least validation cost
    /// `<a(t), e>`, then the `t` with the largest validation measure.
    MinCost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub grid: CostGrid,
    pub c_values: Vec<f64>,
    pub loss: LossKind,
    /// Tune the decision threshold on validation data; otherwise it is 0.
    pub threshold: bool,
    pub selection: SelectionRule,
    pub train: TrainConfig,
    /// Worker threads for grid cells; 0 uses every core.
    pub workers: usize,
}

impl SearchConfig {
    /// `C in {2^-6, ..., 2^6}`.
    pub fn default_c_values() -> Vec<f64> {
        (-6..=6).map(|k| 2f64.powi(k)).collect()
    }

    pub fn new(loss: LossKind) -> Self {
        SearchConfig {
            grid: CostGrid::Paper,
            c_values: Self::default_c_values(),
            loss,
            threshold: true,
            selection: SelectionRule::MaxMeasure,
            train: TrainConfig::default(),
            workers: 0,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), SearchError> {
        if self.c_values.is_empty() || self.c_values.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(SearchError::InvalidConfig("C values must be a non-empty list of positive numbers".into()));
        }
        self.train.validate()?;
        Ok(())
    }

    pub(crate) fn pool(&self) -> Result<rayon::ThreadPool, SearchError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| SearchError::InvalidConfig(format!("thread pool: {e}")))
    }
}

/// One evaluated grid cell. Label 0 rows summarize all labels at one `t`
/// (micro F) and carry no `C` or threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub label: usize,
    pub t: f64,
    pub c: Option<f64>,
    pub val_f: Option<f64>,
    pub val_cost: Option<f64>,
    pub theta: Option<f64>,
    pub chosen: bool,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult {
    /// One model per label (a single one for binary tasks), thresholds set.
    pub models: Vec<LinearModel>,
    pub best_t: Vec<f64>,
    pub best_c: Vec<f64>,
    /// Validation measure of the selected models.
    pub val_value: f64,
    pub trace: Vec<TraceRow>,
    pub bracket: Option<BracketOutcome>,
    pub test: Option<EvalReport>,
}

impl OptResult {
    pub fn evaluate_on(&mut self, test: &Dataset, spec: &MeasureSpec) -> Result<&EvalReport, SearchError> {
        let report = evaluate(&self.models, test, spec)?;
        Ok(self.test.insert(report))
    }
}

/// Levels visited by a non-bracketing grid.
pub(crate) fn grid_levels(grid: &CostGrid, spec: &MeasureSpec) -> Result<Vec<f64>, SearchError> {
    match grid {
        CostGrid::Paper => {
            let max = spec.max_level();
            let levels: Vec<f64> = paper_grid().into_iter().filter(|&t| t <= max).collect();
            if levels.len() < 19 {
                log::warn!("t grid 0.1..1.9 truncated to t <= {max} for beta = {}", spec.beta);
            }
            if levels.is_empty() {
                return Err(SearchError::InvalidGrid("no level of the 0.1..1.9 grid is admissible".into()));
            }
            Ok(levels)
        }
        CostGrid::Step(g) => cost_grid(spec, g),
        CostGrid::Bracket { .. } => Err(SearchError::InvalidGrid("bracketing has no fixed levels".into())),
    }
}
