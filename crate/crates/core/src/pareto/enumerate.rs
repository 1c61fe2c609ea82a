use serde::Serialize;

use super::{FiniteDistribution, ParetoError};
use crate::metrics::{ErrorProfile, Scalar, Task};

pub const DEFAULT_CAP: u64 = 1 << 20;

/// Deterministic classifier on the points of a distribution: the predicted
/// class of each point (1-based) for binary and multiclass tasks, or the
/// predicted label set of each point as a bitmask (bit `k - 1` for label
/// `k`) for multilabel tasks.
pub type Assignment = Vec<u32>;

#[derive(Debug, Clone, Serialize)]
pub struct ProfileSet<T = f64> {
    pub task: Task,
    pub labels: usize,
    pub entries: Vec<(Assignment, ErrorProfile<T>)>,
    /// Largest Euclidean norm of a flattened profile.
    pub max_norm: f64,
}

impl<T: Scalar> ProfileSet<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn profile(&self, i: usize) -> &ErrorProfile<T> {
        &self.entries[i].1
    }

    pub fn index_of(&self, assignment: &[u32]) -> Option<usize> {
        self.entries.iter().position(|(a, _)| a == assignment)
    }
}

/// Error profile of one deterministic classifier.
pub fn profile_of<T: Scalar>(dist: &FiniteDistribution<T>, assignment: &[u32]) -> ErrorProfile<T> {
    let l = dist.labels();
    let mut fneg = vec![T::zero(); l];
    let mut fpos = vec![T::zero(); l];
    for (p, &h) in dist.points().iter().zip(assignment) {
        let m = &p.mass;
        match dist.task() {
            Task::Binary => {
                let pos = m.clone() * p.probs[0].clone();
                let neg = m.clone() - pos.clone();
                if h == 1 {
                    fpos[0] = fpos[0].clone() + neg;
                } else {
                    fneg[0] = fneg[0].clone() + pos;
                }
            }
            Task::Multiclass => {
                let h = h as usize - 1;
                for (k, q) in p.probs.iter().enumerate() {
                    if k == h {
                        fpos[k] = fpos[k].clone() + m.clone() * (T::one() - q.clone());
                    } else {
                        fneg[k] = fneg[k].clone() + m.clone() * q.clone();
                    }
                }
            }
            Task::Multilabel => {
                for (k, q) in p.probs.iter().enumerate() {
                    if h & (1 << k) != 0 {
                        fpos[k] = fpos[k].clone() + m.clone() * (T::one() - q.clone());
                    } else {
                        fneg[k] = fneg[k].clone() + m.clone() * q.clone();
                    }
                }
            }
        }
    }
    let priors = dist.priors();
    match dist.task() {
        Task::Binary => ErrorProfile::binary(priors[0].clone(), fneg[0].clone(), fpos[0].clone()),
        _ => ErrorProfile { false_neg: fneg, false_pos: fpos, priors },
    }
}

/// One profile per deterministic classifier, in mixed-radix order with the
/// first point as the least significant digit. Refuses to enumerate more
/// than `cap` classifiers.
pub fn enumerate_profiles<T: Scalar>(dist: &FiniteDistribution<T>, cap: u64) -> Result<ProfileSet<T>, ParetoError> {
    let n = dist.points().len();
    let radix: u64 = match dist.task() {
        Task::Binary => 2,
        Task::Multiclass => dist.labels() as u64,
        Task::Multilabel => 1u64.checked_shl(dist.labels() as u32).unwrap_or(u64::MAX),
    };
    let total = (0..n).try_fold(1u64, |acc, _| acc.checked_mul(radix).filter(|&t| t <= cap));
    let Some(total) = total else {
        return Err(ParetoError::CapExceeded { cap, points: n, radix });
    };
    let mut entries = Vec::with_capacity(total as usize);
    let mut max_norm: f64 = 0.0;
    for index in 0..total {
        let mut rest = index;
        let assignment: Assignment = (0..n)
            .map(|_| {
                let digit = (rest % radix) as u32;
                rest /= radix;
                match dist.task() {
                    Task::Multilabel => digit,
                    _ => digit + 1,
                }
            })
            .collect();
        let e = profile_of(dist, &assignment);
        max_norm = max_norm.max(e.norm());
        entries.push((assignment, e));
    }
    Ok(ProfileSet { task: dist.task(), labels: dist.labels(), entries, max_norm })
}
