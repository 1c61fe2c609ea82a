use rayon::prelude::*;

use super::{SearchConfig, SearchError};
use crate::learners::{
    predict_scores, train_weighted_linear, tune_threshold, Dataset, LinearModel, ThresholdObjective,
};
use crate::metrics::{cost_vector, error_profile, error_profile_weighted, ErrorProfile, MeasureKind, MeasureSpec, Targets};

/// Training/validation pair of one binary problem.
pub(crate) struct Problem {
    pub label: usize,
    pub train: Dataset,
    pub val: Dataset,
    /// No positive training example: the always-negative rule is used.
    pub trivial: bool,
}

impl Problem {
    pub fn new(label: usize, train: Dataset, val: Dataset) -> Result<Self, SearchError> {
        if train.dim() != val.dim() {
            let dim = train.dim().max(val.dim());
            return Problem::new(label, train.with_dim(dim)?, val.with_dim(dim)?);
        }
        let trivial = train.positive_fraction()? == 0.0;
        if trivial {
            log::warn!("label {label}: no positive training example, using the always-negative rule");
        }
        Ok(Problem { label, train, val, trivial })
    }
}

/// A trained cell before any threshold is chosen.
#[derive(Clone)]
pub(crate) struct Cell {
    pub label: usize,
    pub t: f64,
    pub c: f64,
    pub cost_fn: f64,
    pub cost_fp: f64,
    pub trivial: bool,
    pub outcome: Result<(LinearModel, Vec<f64>), String>,
}

/// Costs `(a_fn, a_fp)` of one binary subproblem at level `t`.
pub(crate) fn cost_pair(spec: &MeasureSpec, t: f64) -> Result<(f64, f64), SearchError> {
    let binary = if spec.kind.is_jaccard() { MeasureSpec::binary_jaccard() } else { MeasureSpec::binary_f(spec.beta) };
    let a = cost_vector(&binary, t, &[0.5, 0.5])?;
    Ok((a.a[0], a.a[1]))
}

pub(crate) fn binary_spec(spec: &MeasureSpec) -> MeasureSpec {
    match spec.kind {
        MeasureKind::BinaryJaccard | MeasureKind::MicroMultilabelJaccard | MeasureKind::MicroMulticlassJaccard => {
            MeasureSpec::binary_jaccard()
        }
        _ => MeasureSpec::binary_f(spec.beta),
    }
}

/// Trains every `(problem, t, C)` task on the configured pool; results come
/// back in task order.
pub(crate) fn train_cells(
    problems: &[Problem],
    tasks: &[(usize, f64, f64)],
    spec: &MeasureSpec,
    cfg: &SearchConfig,
    pool: &rayon::ThreadPool,
) -> Result<Vec<Cell>, SearchError> {
    let costs = tasks.iter().map(|&(_, t, _)| cost_pair(spec, t)).collect::<Result<Vec<_>, _>>()?;
    Ok(pool.install(|| {
        tasks
            .par_iter()
            .zip(costs.par_iter())
            .map(|(&(p, t, c), &(cost_fn, cost_fp))| {
                let problem = &problems[p];
                let outcome = if problem.trivial {
                    let model = LinearModel::always_negative(problem.train.dim(), cfg.loss);
                    predict_scores(&model, &problem.val).map(|s| (model, s)).map_err(|e| e.to_string())
                } else {
                    train_weighted_linear(&problem.train, cfg.loss, cost_fn, cost_fp, c, &cfg.train)
                        .and_then(|mut m| {
                            m.trained_cost = Some(t);
                            let s = predict_scores(&m, &problem.val)?;
                            Ok((m, s))
                        })
                        .map_err(|e| e.to_string())
                };
                if let Err(e) = &outcome {
                    log::warn!("label {} t={t} C={c}: skipped ({e})", problem.label);
                }
                Cell { label: problem.label, t, c, cost_fn, cost_fp, trivial: problem.trivial, outcome }
            })
            .collect()
    }))
}

/// Binary validation profile at threshold `theta`.
pub(crate) fn profile_at(scores: &[f64], val: &Dataset, theta: f64) -> Result<ErrorProfile, SearchError> {
    let truth: Vec<usize> = val.binary_labels()?.iter().map(|&c| usize::from(c)).collect();
    let pred: Vec<usize> = scores.iter().map(|&s| if s >= theta { 1 } else { 2 }).collect();
    let spec = MeasureSpec::binary_f(1.0);
    Ok(match val.weights() {
        Some(w) => error_profile_weighted(Targets::Classes(&pred), Targets::Classes(&truth), w, &spec)?,
        None => error_profile(Targets::Classes(&pred), Targets::Classes(&truth), &spec)?,
    })
}

/// Threshold for `objective`, or the model's own when tuning is off or the
/// model is the always-negative rule.
pub(crate) fn choose_threshold(
    trivial: bool,
    model: &LinearModel,
    scores: &[f64],
    val: &Dataset,
    tune: bool,
    objective: &ThresholdObjective,
) -> Result<f64, SearchError> {
    if !tune || trivial {
        return Ok(model.threshold);
    }
    Ok(tune_threshold(scores, val.binary_labels()?, val.weights(), objective)?.theta)
}
