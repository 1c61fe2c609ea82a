use serde::{Deserialize, Serialize};

use super::{rng, DataError};
use crate::learners::{Dataset, Labels, DEFAULT_BIAS};

/// Multilabel data with dense Gaussian features and one logistic model per
/// label. A very negative offset makes a label rare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultilabelSpec {
    pub n: usize,
    pub dim: usize,
    pub seed: u64,
    /// Logit offset per label; its length is the label count.
    pub offsets: Vec<f64>,
    /// Norm of each label's weight vector.
    pub signal: f64,
}

impl MultilabelSpec {
    /// Four labels, the last one rare.
    pub fn four_labels(n: usize, seed: u64) -> Self {
        MultilabelSpec { n, dim: 10, seed, offsets: vec![0.0, -1.0, -2.0, -6.5], signal: 3.0 }
    }
}

pub fn generate_multilabel(spec: &MultilabelSpec) -> Result<Dataset, DataError> {
    if spec.n == 0 || spec.dim == 0 || spec.offsets.is_empty() || !spec.signal.is_finite() {
        return Err(DataError::InvalidSpec(format!("{spec:?}")));
    }
    let mut r = rng::stream(spec.seed, 0);
    let weights: Vec<Vec<f64>> = spec
        .offsets
        .iter()
        .map(|_| {
            let v: Vec<f64> = (0..spec.dim).map(|_| rng::gaussian(&mut r)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| spec.signal * x / norm).collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(spec.n);
    let mut sets = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let x: Vec<f64> = (0..spec.dim).map(|_| rng::gaussian(&mut r)).collect();
        let mut set = Vec::new();
        for (k, (w, b)) in weights.iter().zip(&spec.offsets).enumerate() {
            let logit = b + w.iter().zip(&x).map(|(a, c)| a * c).sum::<f64>();
            if rng::uniform(&mut r) < 1.0 / (1.0 + (-logit).exp()) {
                set.push(k + 1);
            }
        }
        rows.push(x.into_iter().enumerate().map(|(j, v)| (j as u32 + 1, v)).collect());
        sets.push(set);
    }
    let labels = Labels::Multilabel { sets, count: spec.offsets.len() };
    Ok(Dataset::new(rows, labels, spec.dim, DEFAULT_BIAS)?)
}
