use std::sync::Arc;

use super::LearnError;

/// Sparse example: `(feature index, value)` pairs, indices 1-based and
/// strictly ascending.
pub type SparseRow = Vec<(u32, f64)>;

pub const DEFAULT_BIAS: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    /// Class per example, 1 (positive) or 2 (negative).
    Binary(Vec<u8>),
    /// Label set per example, labels in `1..=count`.
    Multilabel { sets: Vec<Vec<usize>>, count: usize },
}

/// Immutable sparse dataset with a constant bias feature.
///
/// The bias acts as feature `dim + 1` of every row; it is stored once rather
/// than in each row. Rows are shared between views, so binarizing a
/// multilabel dataset per label does not copy features.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    rows: Arc<Vec<SparseRow>>,
    labels: Labels,
    weights: Option<Arc<Vec<f64>>>,
    bias: f64,
}

impl Dataset {
    pub fn new(rows: Vec<SparseRow>, labels: Labels, dim: usize, bias: f64) -> Result<Self, LearnError> {
        if rows.is_empty() {
            return Err(LearnError::InvalidDataset("dataset has no examples".into()));
        }
        if !bias.is_finite() {
            return Err(LearnError::InvalidDataset("bias value must be finite".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            let mut prev = 0u32;
            for &(j, v) in row {
                if j == 0 || j as usize > dim || j <= prev {
                    return Err(LearnError::InvalidDataset(format!(
                        "row {i}: feature index {j} is out of range or not ascending"
                    )));
                }
                if !v.is_finite() {
                    return Err(LearnError::InvalidDataset(format!("row {i}: non-finite value")));
                }
                prev = j;
            }
        }
        match &labels {
            Labels::Binary(y) => {
                if y.len() != rows.len() || y.iter().any(|&c| c != 1 && c != 2) {
                    return Err(LearnError::InvalidDataset("binary labels must be 1 or 2, one per row".into()));
                }
            }
            Labels::Multilabel { sets, count } => {
                if sets.len() != rows.len() || *count == 0 {
                    return Err(LearnError::InvalidDataset("one label set per row and at least one label".into()));
                }
                if sets.iter().flatten().any(|&k| k == 0 || k > *count) {
                    return Err(LearnError::InvalidDataset(format!("labels must lie in 1..={count}")));
                }
            }
        }
        Ok(Dataset { dim, rows: Arc::new(rows), labels, weights: None, bias })
    }

    /// Attaches non-negative example weights.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self, LearnError> {
        if weights.len() != self.len() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(LearnError::InvalidDataset("weights must be finite, non-negative, one per row".into()));
        }
        self.weights = Some(Arc::new(weights));
        Ok(self)
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }

    /// Widens the feature space, e.g. to align a test set with training.
    pub fn with_dim(mut self, dim: usize) -> Result<Self, LearnError> {
        if dim < self.dim {
            return Err(LearnError::DimensionMismatch { expected: self.dim, found: dim });
        }
        self.dim = dim;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref().map(Vec::as_slice)
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn binary_labels(&self) -> Result<&[u8], LearnError> {
        match &self.labels {
            Labels::Binary(y) => Ok(y),
            Labels::Multilabel { .. } => Err(LearnError::NotBinary),
        }
    }

    pub fn label_sets(&self) -> Option<(&[Vec<usize>], usize)> {
        match &self.labels {
            Labels::Multilabel { sets, count } => Some((sets, *count)),
            Labels::Binary(_) => None,
        }
    }

    pub fn label_count(&self) -> usize {
        match &self.labels {
            Labels::Binary(_) => 2,
            Labels::Multilabel { count, .. } => *count,
        }
    }

    /// Label-vs-rest binarization of `label` (1-based).
    pub fn binary_view(&self, label: usize) -> Result<Dataset, LearnError> {
        let (sets, count) = self.label_sets().ok_or(LearnError::NotMultilabel)?;
        if label == 0 || label > count {
            return Err(LearnError::InvalidDataset(format!("label {label} outside 1..={count}")));
        }
        let y = sets.iter().map(|s| if s.contains(&label) { 1 } else { 2 }).collect();
        Ok(Dataset { labels: Labels::Binary(y), ..self.clone() })
    }

    /// Copy of the examples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let rows = indices.iter().map(|&i| self.rows[i].clone()).collect();
        let labels = match &self.labels {
            Labels::Binary(y) => Labels::Binary(indices.iter().map(|&i| y[i]).collect()),
            Labels::Multilabel { sets, count } => Labels::Multilabel {
                sets: indices.iter().map(|&i| sets[i].clone()).collect(),
                count: *count,
            },
        };
        let weights = self.weights.as_ref().map(|w| Arc::new(indices.iter().map(|&i| w[i]).collect()));
        Dataset { dim: self.dim, rows: Arc::new(rows), labels, weights, bias: self.bias }
    }

    /// Weighted fraction of positive examples of a binary dataset.
    pub fn positive_fraction(&self) -> Result<f64, LearnError> {
        let y = self.binary_labels()?;
        let (mut pos, mut total) = (0.0, 0.0);
        for (i, &c) in y.iter().enumerate() {
            let w = self.weight(i);
            total += w;
            if c == 1 {
                pos += w;
            }
        }
        Ok(if total > 0.0 { pos / total } else { 0.0 })
    }

    /// `<w, x_i>` including the bias feature; `w` has `dim + 1` entries.
    pub(crate) fn dot(&self, i: usize, w: &[f64]) -> f64 {
        let mut s = w[self.dim] * self.bias;
        for &(j, v) in &self.rows[i] {
            s += w[j as usize - 1] * v;
        }
        s
    }

    /// `w += scale * x_i`.
    pub(crate) fn axpy(&self, i: usize, scale: f64, w: &mut [f64]) {
        w[self.dim] += scale * self.bias;
        for &(j, v) in &self.rows[i] {
            w[j as usize - 1] += scale * v;
        }
    }

    pub(crate) fn sq_norm(&self, i: usize) -> f64 {
        self.bias * self.bias + self.rows[i].iter().map(|(_, v)| v * v).sum::<f64>()
    }
}
