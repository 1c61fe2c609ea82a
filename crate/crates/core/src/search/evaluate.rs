use serde::Serialize;

use super::SearchError;
use crate::learners::{predict, Dataset, LinearModel};
use crate::metrics::{error_profile, error_profile_weighted, measure_value, ErrorProfile, MeasureKind, MeasureSpec, Targets, Task};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelReport {
    pub label: usize,
    /// Binary F-beta of this label against the rest.
    pub f: Option<f64>,
    pub false_neg: f64,
    pub false_pos: f64,
    pub prior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub measure: MeasureKind,
    pub beta: f64,
    /// `None` when the measure is undefined on the profile.
    pub value: Option<f64>,
    pub profile: ErrorProfile,
    pub per_label: Vec<LabelReport>,
}

/// Builds the report for an already computed profile.
pub fn report_for(spec: &MeasureSpec, profile: ErrorProfile) -> EvalReport {
    let per_label_spec = MeasureSpec::binary_f(spec.beta);
    let per_label = (0..profile.labels())
        .map(|k| {
            let e = ErrorProfile::binary(profile.priors[k], profile.false_neg[k], profile.false_pos[k]);
            LabelReport {
                label: k + 1,
                f: measure_value(&per_label_spec, &e).ok(),
                false_neg: profile.false_neg[k],
                false_pos: profile.false_pos[k],
                prior: profile.priors[k],
            }
        })
        .collect();
    EvalReport {
        measure: spec.kind,
        beta: spec.beta,
        value: measure_value(spec, &profile).ok(),
        profile,
        per_label,
    }
}

/// Scores `models` on `ds`: one model for binary measures, one per label
/// for multilabel measures.
pub fn evaluate(models: &[LinearModel], ds: &Dataset, spec: &MeasureSpec) -> Result<EvalReport, SearchError> {
    spec.validate()?;
    let profile = match spec.kind.task() {
        Task::Binary => {
            let [model] = models else {
                return Err(SearchError::Shape(format!("binary measures take one model, got {}", models.len())));
            };
            let truth: Vec<usize> = ds.binary_labels()?.iter().map(|&c| usize::from(c)).collect();
            let pred = predict(model, ds)?;
            profile_of(Targets::Classes(&pred), Targets::Classes(&truth), ds, spec)?
        }
        Task::Multilabel => {
            let (sets, count) = ds.label_sets().ok_or_else(|| SearchError::Shape("dataset is not multilabel".into()))?;
            if count != spec.labels || models.len() != count {
                return Err(SearchError::Shape(format!(
                    "{} models and {count} dataset labels for a {}-label measure",
                    models.len(),
                    spec.labels
                )));
            }
            let mut pred = vec![Vec::new(); ds.len()];
            for (k, model) in models.iter().enumerate() {
                for (i, class) in predict(model, ds)?.into_iter().enumerate() {
                    if class == 1 {
                        pred[i].push(k + 1);
                    }
                }
            }
            profile_of(Targets::Sets(&pred), Targets::Sets(sets), ds, spec)?
        }
        Task::Multiclass => return Err(SearchError::Shape("multiclass models are not supported".into())),
    };
    Ok(report_for(spec, profile))
}

fn profile_of(pred: Targets<'_>, truth: Targets<'_>, ds: &Dataset, spec: &MeasureSpec) -> Result<ErrorProfile, SearchError> {
    Ok(match ds.weights() {
        Some(w) => error_profile_weighted(pred, truth, w, spec)?,
        None => error_profile(pred, truth, spec)?,
    })
}
