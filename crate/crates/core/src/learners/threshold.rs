use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::metrics::{measure_value, ErrorProfile, MeasureSpec, Task};

/// What a decision threshold is tuned for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThresholdObjective {
    /// Maximize a binary measure.
    Measure(MeasureSpec),
    /// Minimize `fn_cost * fn + fp_cost * fp`.
    Cost { fn_cost: f64, fp_cost: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdChoice {
    pub theta: f64,
    /// Measure (to maximize) or cost (to minimize) at `theta`.
    pub value: f64,
    /// Set when a measure is tuned on data without positives: `theta` then
    /// rejects everything and `value` is 0.
    pub degenerate: bool,
}

/// Candidate thresholds for `scores`, in decreasing order: above the
/// maximum, the midpoints between consecutive distinct scores, and below the
/// minimum. Predicting positive iff `score >= theta`.
pub fn threshold_candidates(scores: &[f64]) -> Vec<f64> {
    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_by(|a, b| b.total_cmp(a));
    distinct.dedup();
    let mut out = Vec::with_capacity(distinct.len() + 1);
    if let (Some(&hi), Some(&lo)) = (distinct.first(), distinct.last()) {
        out.push(hi + 1.0);
        out.extend(distinct.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0));
        out.push(lo - 1.0);
    }
    out
}

fn evaluate(objective: &ThresholdObjective, e: &ErrorProfile) -> Option<f64> {
    match objective {
        ThresholdObjective::Measure(spec) => measure_value(spec, e).ok(),
        ThresholdObjective::Cost { fn_cost, fp_cost } => Some(fn_cost * e.false_neg[0] + fp_cost * e.false_pos[0]),
    }
}

fn better(objective: &ThresholdObjective, candidate: f64, incumbent: f64) -> bool {
    match objective {
        ThresholdObjective::Measure(_) => candidate >= incumbent,
        ThresholdObjective::Cost { .. } => candidate <= incumbent,
    }
}

/// Picks the threshold optimizing `objective` on `(scores, labels)`.
///
/// A single sorted sweep; each candidate's profile is built from the same
/// counts an explicit evaluation would produce, so the value agrees exactly
/// with scoring the thresholded predictions directly. Ties go to the
/// smallest threshold.
pub fn tune_threshold(
    scores: &[f64],
    labels: &[u8],
    weights: Option<&[f64]>,
    objective: &ThresholdObjective,
) -> Result<ThresholdChoice, LearnError> {
    let n = scores.len();
    if n == 0 {
        return Err(LearnError::InvalidDataset("no scores to threshold".into()));
    }
    if labels.len() != n || weights.is_some_and(|w| w.len() != n) {
        return Err(LearnError::DimensionMismatch { expected: n, found: labels.len() });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(LearnError::NonFinite);
    }
    match objective {
        ThresholdObjective::Measure(spec) if spec.kind.task() != Task::Binary => {
            return Err(LearnError::InvalidConfig(format!("threshold tuning needs a binary measure, got {}", spec.kind)))
        }
        ThresholdObjective::Cost { fn_cost, fp_cost } if !(fn_cost.is_finite() && fp_cost.is_finite()) => {
            return Err(LearnError::InvalidCosts { cost_fn: *fn_cost, cost_fp: *fp_cost })
        }
        _ => {}
    }
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let total: f64 = (0..n).map(w).sum();
    let positives: f64 = (0..n).filter(|&i| labels[i] == 1).map(w).sum();
    if total <= 0.0 {
        return Err(LearnError::InvalidDataset("example weights sum to zero".into()));
    }

    let candidates = threshold_candidates(scores);
    if positives == 0.0 && matches!(objective, ThresholdObjective::Measure(_)) {
        return Ok(ThresholdChoice { theta: candidates[0], value: 0.0, degenerate: true });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let profile = |tp: f64, fp: f64| ErrorProfile::binary(positives / total, (positives - tp) / total, fp / total);
    let mut best: Option<(f64, f64)> = None;
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut cursor = 0;
    for &theta in &candidates {
        while cursor < n && scores[order[cursor]] >= theta {
            let i = order[cursor];
            if labels[i] == 1 {
                tp += w(i);
            } else {
                fp += w(i);
            }
            cursor += 1;
        }
        let Some(value) = evaluate(objective, &profile(tp, fp)) else { continue };
        if best.map_or(true, |(_, b)| better(objective, value, b)) {
            best = Some((theta, value));
        }
    }
    // with positives present, taking everything always has a defined value
    let (theta, value) = best.ok_or(LearnError::NonFinite)?;
    Ok(ThresholdChoice { theta, value, degenerate: false })
}
