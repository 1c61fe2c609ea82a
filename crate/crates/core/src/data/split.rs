use serde::{Deserialize, Serialize};

use super::{rng, DataError};
use crate::learners::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub seed: u64,
    /// Share of the non-test examples held out for validation.
    pub validation_fraction: f64,
    /// Share of all examples held out for testing; `None` when a separate
    /// test set exists.
    pub test_fraction: Option<f64>,
    pub replicates: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { seed: 0, validation_fraction: 1.0 / 3.0, test_fraction: None, replicates: 5 }
    }
}

impl SplitSpec {
    pub const DEFAULT_TEST_FRACTION: f64 = 0.25;

    pub fn validate(&self) -> Result<(), DataError> {
        let ok = |f: f64| f > 0.0 && f < 1.0;
        if !ok(self.validation_fraction) || self.test_fraction.is_some_and(|f| !ok(f)) || self.replicates == 0 {
            return Err(DataError::InvalidSpec(format!("{self:?}")));
        }
        Ok(())
    }
}

/// Sorted example indices of each part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Option<Dataset>,
    pub indices: SplitIndices,
}

/// Partition of `0..n` for `replicate`: a ChaCha8 stream keyed by
/// `(seed, replicate)` shuffles the indices, the test part takes the first
/// `round(n * test_fraction)`, validation the next
/// `round(rest * validation_fraction)`, and training the remainder.
pub fn split_indices(n: usize, spec: &SplitSpec, replicate: usize) -> Result<SplitIndices, DataError> {
    spec.validate()?;
    if replicate >= spec.replicates {
        return Err(DataError::InvalidSpec(format!("replicate {replicate} of {}", spec.replicates)));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut rng::stream(spec.seed, replicate as u64), &mut perm);

    let n_test = spec.test_fraction.map(|f| (n as f64 * f).round() as usize);
    let rest = n - n_test.unwrap_or(0);
    let n_val = (rest as f64 * spec.validation_fraction).round() as usize;

    let part = |range: std::ops::Range<usize>| {
        let mut v = perm[range].to_vec();
        v.sort_unstable();
        v
    };
    let t = n_test.unwrap_or(0);
    let out = SplitIndices {
        test: n_test.map(|k| part(0..k)),
        val: part(t..t + n_val),
        train: part(t + n_val..n),
    };
    if out.train.is_empty() {
        return Err(DataError::EmptyPart("training"));
    }
    if out.val.is_empty() {
        return Err(DataError::EmptyPart("validation"));
    }
    if out.test.as_ref().is_some_and(Vec::is_empty) {
        return Err(DataError::EmptyPart("test"));
    }
    Ok(out)
}

pub fn split(ds: &Dataset, spec: &SplitSpec, replicate: usize) -> Result<Split, DataError> {
    let indices = split_indices(ds.len(), spec, replicate)?;
    Ok(Split {
        train: ds.subset(&indices.train),
        val: ds.subset(&indices.val),
        test: indices.test.as_ref().map(|t| ds.subset(t)),
        indices,
    })
}
