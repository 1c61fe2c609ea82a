//! Error profiles, pseudo-linear performance measures and their level sets.
//!
//! An error profile summarizes a classifier against a distribution by the
//! probability mass of its false negatives and false positives for every
//! class, together with the class priors. Every measure in this module is a
//! ratio of affine functions of the profile, so for each level `t` there is a
//! cost vector `a(t) >= 0` and an offset `b(t)` with
//!
//! ```text
//! F(e) >= t  <=>  <a(t), e> + b(t) <= 0
//! ```
//!
//! on the domain where the denominator is positive. Maximizing `F` therefore
//! reduces to minimizing the linear cost `<a(F*), e>`.
//!
//! The formulas are generic over [`Scalar`] so that the enumeration engine can
//! run them in exact rational arithmetic; everything else uses `f64`.

use std::fmt::Debug;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("predictions ({predictions}) and labels ({labels}) differ in length")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("no examples to summarize")]
    Empty,
    #[error("label {label} at position {index} is outside 1..={labels}")]
    LabelOutOfRange { index: usize, label: usize, labels: usize },
    #[error("{kind} expects {expected} targets")]
    WrongTargetShape { kind: MeasureKind, expected: &'static str },
    #[error("profile has {found} labels, measure expects {expected}")]
    LabelCountMismatch { found: usize, expected: usize },
    #[error("cost vector has {found} entries, profile has {expected}")]
    DimensionMismatch { found: usize, expected: usize },
    #[error("{kind} is undefined on this profile (denominator is not positive)")]
    DegenerateDenominator { kind: MeasureKind },
    #[error("discretization factor for {kind} is undefined (no mass in the relevant classes)")]
    DegenerateTask { kind: MeasureKind },
    #[error("level {t} outside the admissible range [0, {max}] for {kind}")]
    LevelOutOfRange { kind: MeasureKind, t: f64, max: f64 },
    #[error("{0} is not pseudo-linear; use per-label cost vectors")]
    NotPseudoLinear(MeasureKind),
    #[error("invalid measure specification: {0}")]
    InvalidSpec(String),
    #[error("error profile violates its invariants: {0}")]
    InvalidProfile(String),
}

pub type Result<T, E = MetricError> = std::result::Result<T, E>;

/// Number type the measure formulas are evaluated in.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync
{
    /// Absolute slack when deciding that two computed values coincide.
    fn slack() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn slack() -> f64 {
        1e-12
    }
}

impl Scalar for BigRational {
    fn slack() -> Self {
        BigRational::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    Binary,
    Multilabel,
    Multiclass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureKind {
    BinaryF,
    MacroF,
    MicroMultilabelF,
    MicroMulticlassF,
    BinaryJaccard,
    MicroMultilabelJaccard,
    MicroMulticlassJaccard,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 7] = [
        MeasureKind::BinaryF,
        MeasureKind::MacroF,
        MeasureKind::MicroMultilabelF,
        MeasureKind::MicroMulticlassF,
        MeasureKind::BinaryJaccard,
        MeasureKind::MicroMultilabelJaccard,
        MeasureKind::MicroMulticlassJaccard,
    ];

    pub fn task(self) -> Task {
        match self {
            MeasureKind::BinaryF | MeasureKind::BinaryJaccard => Task::Binary,
            MeasureKind::MacroF
            | MeasureKind::MicroMultilabelF
            | MeasureKind::MicroMultilabelJaccard => Task::Multilabel,
            MeasureKind::MicroMulticlassF | MeasureKind::MicroMulticlassJaccard => {
                Task::Multiclass
            }
        }
    }

    pub fn is_jaccard(self) -> bool {
        matches!(
            self,
            MeasureKind::BinaryJaccard
                | MeasureKind::MicroMultilabelJaccard
                | MeasureKind::MicroMulticlassJaccard
        )
    }

    pub fn is_pseudo_linear(self) -> bool {
        self != MeasureKind::MacroF
    }

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::BinaryF => "binary-f",
            MeasureKind::MacroF => "macro-f",
            MeasureKind::MicroMultilabelF => "micro-f",
            MeasureKind::MicroMulticlassF => "multiclass-micro-f",
            MeasureKind::BinaryJaccard => "jaccard",
            MeasureKind::MicroMultilabelJaccard => "micro-jaccard",
            MeasureKind::MicroMulticlassJaccard => "multiclass-micro-jaccard",
        }
    }
}

impl std::fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self> {
        MeasureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| MetricError::InvalidSpec(format!("unknown measure `{s}`")))
    }
}

/// Which measure to compute, with its parameters.
///
/// `labels` is the label count `L` of the task (2 for binary tasks). The
/// default class of the multiclass micro measures is 1-based and is the class
/// whose predictions are not rewarded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub kind: MeasureKind,
    pub beta: f64,
    pub labels: usize,
    pub default_class: usize,
}

impl MeasureSpec {
    pub fn new(kind: MeasureKind, beta: f64, labels: usize) -> Result<Self> {
        let spec = MeasureSpec { kind, beta, labels, default_class: 1 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn binary_f(beta: f64) -> Self {
        Self::new(MeasureKind::BinaryF, beta, 2).expect("valid binary spec")
    }

    pub fn binary_jaccard() -> Self {
        Self::new(MeasureKind::BinaryJaccard, 1.0, 2).expect("valid binary spec")
    }

    pub fn with_default_class(mut self, class: usize) -> Result<Self> {
        self.default_class = class;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(MetricError::InvalidSpec(format!("beta must be positive, got {}", self.beta)));
        }
        let min_labels = match self.kind.task() {
            Task::Binary => {
                if self.labels != 2 {
                    return Err(MetricError::InvalidSpec(format!(
                        "binary measures have exactly 2 labels, got {}",
                        self.labels
                    )));
                }
                2
            }
            Task::Multilabel => 1,
            Task::Multiclass => 2,
        };
        if self.labels < min_labels {
            return Err(MetricError::InvalidSpec(format!(
                "{} needs at least {min_labels} labels, got {}",
                self.kind, self.labels
            )));
        }
        if self.default_class == 0 || self.default_class > self.labels {
            return Err(MetricError::InvalidSpec(format!(
                "default class {} outside 1..={}",
                self.default_class, self.labels
            )));
        }
        Ok(())
    }

    pub fn beta_sq(&self) -> f64 {
        self.beta * self.beta
    }

    /// Largest admissible level for [`cost_vector`].
    pub fn max_level(&self) -> f64 {
        if self.kind.is_jaccard() {
            1.0
        } else {
            1.0 + self.beta_sq()
        }
    }

    /// Lipschitz constant of `t -> a(t)`.
    pub fn lipschitz(&self) -> f64 {
        if self.kind.is_jaccard() {
            1.0
        } else {
            self.beta_sq().max(1.0)
        }
    }
}

/// Per-class false negative and false positive probability masses, with the
/// class priors.
///
/// Binary profiles carry both classes: `false_neg[1] == false_pos[0]` and
/// `false_pos[1] == false_neg[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorProfile<T = f64> {
    pub false_neg: Vec<T>,
    pub false_pos: Vec<T>,
    pub priors: Vec<T>,
}

impl<T: Scalar> ErrorProfile<T> {
    pub fn new(false_neg: Vec<T>, false_pos: Vec<T>, priors: Vec<T>) -> Result<Self> {
        let l = priors.len();
        if l == 0 || false_neg.len() != l || false_pos.len() != l {
            return Err(MetricError::InvalidProfile(format!(
                "component lengths {}/{}/{} must agree and be positive",
                false_neg.len(),
                false_pos.len(),
                l
            )));
        }
        Ok(ErrorProfile { false_neg, false_pos, priors })
    }

    pub fn binary(p1: T, fn1: T, fp1: T) -> Self {
        let p2 = T::one() - p1.clone();
        ErrorProfile {
            false_neg: vec![fn1.clone(), fp1.clone()],
            false_pos: vec![fp1, fn1],
            priors: vec![p1, p2],
        }
    }

    pub fn labels(&self) -> usize {
        self.priors.len()
    }

    /// `(fn_1, fp_1, ..., fn_L, fp_L)`.
    pub fn flatten(&self) -> Vec<T> {
        self.false_neg
            .iter()
            .zip(&self.false_pos)
            .flat_map(|(n, p)| [n.clone(), p.clone()])
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.flatten().iter().map(|v| v.approx().powi(2)).sum::<f64>().sqrt()
    }

    pub fn to_f64(&self) -> ErrorProfile<f64> {
        let conv = |v: &Vec<T>| v.iter().map(Scalar::approx).collect();
        ErrorProfile {
            false_neg: conv(&self.false_neg),
            false_pos: conv(&self.false_pos),
            priors: conv(&self.priors),
        }
    }

    /// Checks the range invariants for `task`, with [`Scalar::slack`] tolerance.
    pub fn check(&self, task: Task) -> Result<()> {
        let tol = T::slack();
        let zero = T::zero();
        let one = T::one();
        for k in 0..self.labels() {
            let (n, p, prior) = (&self.false_neg[k], &self.false_pos[k], &self.priors[k]);
            if *prior < zero.clone() - tol.clone() || *prior > one.clone() + tol.clone() {
                return Err(MetricError::InvalidProfile(format!("prior {k} = {prior:?}")));
            }
            if *n < zero.clone() - tol.clone() || *n > prior.clone() + tol.clone() {
                return Err(MetricError::InvalidProfile(format!("fn {k} = {n:?} exceeds prior")));
            }
            let neg = one.clone() - prior.clone();
            if *p < zero.clone() - tol.clone() || *p > neg + tol.clone() {
                return Err(MetricError::InvalidProfile(format!("fp {k} = {p:?} exceeds 1 - prior")));
            }
        }
        match task {
            Task::Binary => {
                if self.labels() != 2
                    || (self.false_neg[1].clone() - self.false_pos[0].clone()).abs() > tol
                    || (self.false_pos[1].clone() - self.false_neg[0].clone()).abs() > tol
                {
                    return Err(MetricError::InvalidProfile(
                        "binary profile must mirror class 1 errors in class 2".into(),
                    ));
                }
            }
            Task::Multiclass => {
                let total = self.priors.iter().fold(T::zero(), |acc, p| acc + p.clone());
                if (total - one).abs() > tol {
                    return Err(MetricError::InvalidProfile("multiclass priors must sum to 1".into()));
                }
            }
            Task::Multilabel => {}
        }
        Ok(())
    }
}

/// Normal `a(t)` and offset `b(t)` of the level set `{F = t}`.
///
/// Entries of `a` follow the flattened profile order
/// `(fn_1 cost, fp_1 cost, ..., fn_L cost, fp_L cost)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostVector<T = f64> {
    pub a: Vec<T>,
    pub b: T,
    pub t: T,
}

impl<T: Scalar> CostVector<T> {
    /// Plain cost vector without a level-set interpretation.
    pub fn from_costs(a: Vec<T>) -> Self {
        CostVector { a, b: T::zero(), t: T::zero() }
    }

    pub fn scaled(&self, factor: T) -> Self {
        CostVector {
            a: self.a.iter().map(|v| v.clone() * factor.clone()).collect(),
            b: self.b.clone() * factor,
            t: self.t.clone(),
        }
    }

    /// Cost pair `(fn cost, fp cost)` charged to `label` (0-based).
    pub fn pair(&self, label: usize) -> (T, T) {
        (self.a[2 * label].clone(), self.a[2 * label + 1].clone())
    }
}

/// Targets of a labelled sample: one class per example (binary and
/// multiclass tasks) or one label set per example (multilabel tasks).
/// Classes and labels are 1-based.
#[derive(Debug, Clone, Copy)]
pub enum Targets<'a> {
    Classes(&'a [usize]),
    Sets(&'a [Vec<usize>]),
}

impl Targets<'_> {
    pub fn len(&self) -> usize {
        match self {
            Targets::Classes(c) => c.len(),
            Targets::Sets(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

struct Tally {
    false_neg: Vec<f64>,
    false_pos: Vec<f64>,
    positives: Vec<f64>,
    total: f64,
}

fn tally(
    predictions: Targets<'_>,
    labels: Targets<'_>,
    spec: &MeasureSpec,
    weight: impl Fn(usize) -> f64,
) -> Result<Tally> {
    spec.validate()?;
    if predictions.len() != labels.len() {
        return Err(MetricError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(MetricError::Empty);
    }
    let l = spec.labels;
    let mut t = Tally {
        false_neg: vec![0.0; l],
        false_pos: vec![0.0; l],
        positives: vec![0.0; l],
        total: 0.0,
    };
    let check = |index: usize, label: usize| {
        if label == 0 || label > l {
            Err(MetricError::LabelOutOfRange { index, label, labels: l })
        } else {
            Ok(label - 1)
        }
    };
    match (spec.kind.task(), predictions, labels) {
        (Task::Binary | Task::Multiclass, Targets::Classes(pred), Targets::Classes(truth)) => {
            for (i, (&h, &y)) in pred.iter().zip(truth).enumerate() {
                let (h, y) = (check(i, h)?, check(i, y)?);
                let w = weight(i);
                t.total += w;
                t.positives[y] += w;
                if h != y {
                    t.false_neg[y] += w;
                    t.false_pos[h] += w;
                }
            }
        }
        (Task::Multilabel, Targets::Sets(pred), Targets::Sets(truth)) => {
            let mut in_pred = vec![false; l];
            let mut in_truth = vec![false; l];
            for (i, (h, y)) in pred.iter().zip(truth).enumerate() {
                in_pred.iter_mut().for_each(|b| *b = false);
                in_truth.iter_mut().for_each(|b| *b = false);
                for &k in h {
                    in_pred[check(i, k)?] = true;
                }
                for &k in y {
                    in_truth[check(i, k)?] = true;
                }
                let w = weight(i);
                t.total += w;
                for k in 0..l {
                    match (in_truth[k], in_pred[k]) {
                        (true, false) => t.false_neg[k] += w,
                        (false, true) => t.false_pos[k] += w,
                        _ => {}
                    }
                    if in_truth[k] {
                        t.positives[k] += w;
                    }
                }
            }
        }
        (task, _, _) => {
            return Err(MetricError::WrongTargetShape {
                kind: spec.kind,
                expected: if task == Task::Multilabel { "label-set" } else { "single-class" },
            })
        }
    }
    if t.total <= 0.0 {
        return Err(MetricError::Empty);
    }
    Ok(t)
}

fn profile_from_tally<T: Scalar>(t: Tally) -> ErrorProfile<T> {
    let total = T::lit(t.total);
    let scale = |v: Vec<f64>| v.into_iter().map(|c| T::lit(c) / total.clone()).collect();
    ErrorProfile {
        false_neg: scale(t.false_neg),
        false_pos: scale(t.false_pos),
        priors: scale(t.positives),
    }
}

/// Empirical error profile of `predictions` against `labels`: every entry is
/// a count divided by the number of examples.
pub fn error_profile<T: Scalar>(
    predictions: Targets<'_>,
    labels: Targets<'_>,
    spec: &MeasureSpec,
) -> Result<ErrorProfile<T>> {
    tally(predictions, labels, spec, |_| 1.0).map(profile_from_tally)
}

/// Like [`error_profile`], with per-example weights normalized to sum to one.
pub fn error_profile_weighted(
    predictions: Targets<'_>,
    labels: Targets<'_>,
    weights: &[f64],
    spec: &MeasureSpec,
) -> Result<ErrorProfile<f64>> {
    if weights.len() != labels.len() {
        return Err(MetricError::LengthMismatch { predictions: weights.len(), labels: labels.len() });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(MetricError::InvalidProfile("weights must be finite and non-negative".into()));
    }
    tally(predictions, labels, spec, |i| weights[i]).map(profile_from_tally)
}

fn sum<T: Scalar>(values: impl Iterator<Item = T>) -> T {
    values.fold(T::zero(), |acc, v| acc + v)
}

fn ratio<T: Scalar>(num: T, den: T, kind: MeasureKind) -> Result<T> {
    if den <= T::zero() {
        Err(MetricError::DegenerateDenominator { kind })
    } else {
        Ok(num / den)
    }
}

fn binary_f<T: Scalar>(one_plus_b2: &T, prior: &T, fneg: &T, fpos: &T, kind: MeasureKind) -> Result<T> {
    let num = one_plus_b2.clone() * (prior.clone() - fneg.clone());
    let den = one_plus_b2.clone() * prior.clone() + fpos.clone() - fneg.clone();
    ratio(num, den, kind)
}

/// Value of the measure on profile `e`.
///
/// Returns [`MetricError::DegenerateDenominator`] where the measure is
/// undefined (for instance binary F with no positives and no predicted
/// positives) instead of mapping it to a sentinel.
pub fn measure_value<T: Scalar>(spec: &MeasureSpec, e: &ErrorProfile<T>) -> Result<T> {
    spec.validate()?;
    if e.labels() != spec.labels {
        return Err(MetricError::LabelCountMismatch { found: e.labels(), expected: spec.labels });
    }
    let kind = spec.kind;
    let one = T::one();
    let b2 = T::lit(spec.beta_sq());
    let opb = one.clone() + b2;
    let (fneg, fpos, priors) = (&e.false_neg, &e.false_pos, &e.priors);
    let d = spec.default_class - 1;
    // Non-default classes of the multiclass micro measures.
    let others = || (0..spec.labels).filter(move |&k| k != d);
    match kind {
        MeasureKind::BinaryF => binary_f(&opb, &priors[0], &fneg[0], &fpos[0], kind),
        MeasureKind::MacroF => {
            let mut total = T::zero();
            for k in 0..spec.labels {
                total = total + binary_f(&opb, &priors[k], &fneg[k], &fpos[k], kind)?;
            }
            Ok(total / T::lit(spec.labels as f64))
        }
        MeasureKind::MicroMultilabelF => {
            let p = sum(priors.iter().cloned());
            let n = sum(fneg.iter().cloned());
            let q = sum(fpos.iter().cloned());
            binary_f(&opb, &p, &n, &q, kind)
        }
        MeasureKind::MicroMulticlassF => {
            let rest = one - priors[d].clone();
            let missed = sum(others().map(|k| fneg[k].clone()));
            let num = opb.clone() * (rest.clone() - missed.clone());
            let den = opb * rest - missed + fneg[d].clone();
            ratio(num, den, kind)
        }
        MeasureKind::BinaryJaccard => ratio(
            priors[0].clone() - fneg[0].clone(),
            priors[0].clone() + fpos[0].clone(),
            kind,
        ),
        MeasureKind::MicroMultilabelJaccard => {
            let p = sum(priors.iter().cloned());
            let n = sum(fneg.iter().cloned());
            let q = sum(fpos.iter().cloned());
            ratio(p.clone() - n, p + q, kind)
        }
        MeasureKind::MicroMulticlassJaccard => {
            let rest = one - priors[d].clone();
            let missed = sum(others().map(|k| fneg[k].clone()));
            ratio(rest.clone() - missed, rest + fneg[d].clone(), kind)
        }
    }
}

fn check_level<T: Scalar>(spec: &MeasureSpec, t: &T) -> Result<()> {
    let max = spec.max_level();
    if *t < T::zero() || *t > T::lit(max) {
        return Err(MetricError::LevelOutOfRange { kind: spec.kind, t: t.approx(), max });
    }
    Ok(())
}

/// Level-set normal `a(t)` and offset `b(t)` such that
/// `measure_value(spec, e) >= t` iff `<a(t), e> + b(t) <= 0`.
///
/// `priors` are the class priors of the profiles the level set is applied
/// to; only the offset depends on them. F measures admit
/// `t in [0, 1 + beta^2]`, Jaccard measures `t in [0, 1]`. Macro F is not
/// pseudo-linear and is rejected; see [`label_cost_vector`].
pub fn cost_vector<T: Scalar>(spec: &MeasureSpec, t: T, priors: &[T]) -> Result<CostVector<T>> {
    spec.validate()?;
    check_level(spec, &t)?;
    if priors.len() != spec.labels {
        return Err(MetricError::LabelCountMismatch { found: priors.len(), expected: spec.labels });
    }
    let l = spec.labels;
    let one = T::one();
    let opb = one.clone() + T::lit(spec.beta_sq());
    let d = spec.default_class - 1;
    let mut a = vec![T::zero(); 2 * l];
    let b = match spec.kind {
        MeasureKind::BinaryF => {
            a[0] = opb.clone() - t.clone();
            a[1] = t.clone();
            opb * priors[0].clone() * (t.clone() - one)
        }
        MeasureKind::MicroMultilabelF => {
            for k in 0..l {
                a[2 * k] = opb.clone() - t.clone();
                a[2 * k + 1] = t.clone();
            }
            opb * (t.clone() - one) * sum(priors.iter().cloned())
        }
        MeasureKind::MicroMulticlassF => {
            for k in (0..l).filter(|&k| k != d) {
                a[2 * k] = opb.clone() - t.clone();
            }
            a[2 * d] = t.clone();
            opb * (t.clone() - one.clone()) * (one - priors[d].clone())
        }
        MeasureKind::BinaryJaccard => {
            a[0] = one.clone();
            a[1] = t.clone();
            priors[0].clone() * (t.clone() - one)
        }
        MeasureKind::MicroMultilabelJaccard => {
            for k in 0..l {
                a[2 * k] = one.clone();
                a[2 * k + 1] = t.clone();
            }
            (t.clone() - one) * sum(priors.iter().cloned())
        }
        MeasureKind::MicroMulticlassJaccard => {
            for k in (0..l).filter(|&k| k != d) {
                a[2 * k] = one.clone();
            }
            a[2 * d] = t.clone();
            (t.clone() - one.clone()) * (one - priors[d].clone())
        }
        MeasureKind::MacroF => return Err(MetricError::NotPseudoLinear(spec.kind)),
    };
    if a.iter().all(Zero::is_zero) {
        return Err(MetricError::InvalidSpec(format!("zero cost vector at t = {}", t.approx())));
    }
    Ok(CostVector { a, b, t })
}

/// Level set of the binary F measure of a single label, embedded in the full
/// `2L` profile: `F_label(e) >= t` iff `<a, e> + b <= 0`.
///
/// This is how macro F delegates to its per-label binary problems; it is also
/// accepted for the other multilabel F kinds.
pub fn label_cost_vector<T: Scalar>(
    spec: &MeasureSpec,
    label: usize,
    t: T,
    priors: &[T],
) -> Result<CostVector<T>> {
    spec.validate()?;
    if spec.kind.task() != Task::Multilabel || spec.kind.is_jaccard() {
        return Err(MetricError::InvalidSpec(format!("per-label costs need a multilabel F kind, got {}", spec.kind)));
    }
    check_level(spec, &t)?;
    if priors.len() != spec.labels {
        return Err(MetricError::LabelCountMismatch { found: priors.len(), expected: spec.labels });
    }
    if label >= spec.labels {
        return Err(MetricError::LabelOutOfRange { index: 0, label: label + 1, labels: spec.labels });
    }
    let opb = T::one() + T::lit(spec.beta_sq());
    let mut a = vec![T::zero(); 2 * spec.labels];
    a[2 * label] = opb.clone() - t.clone();
    a[2 * label + 1] = t.clone();
    let b = opb * priors[label].clone() * (t.clone() - T::one());
    Ok(CostVector { a, b, t })
}

/// Constant `Phi` with `F(e') - F(e) <= Phi * <a(F(e')), e - e'>` for all
/// admissible profiles with `F(e') > F(e)`.
pub fn discretization_factor(spec: &MeasureSpec, priors: &[f64]) -> Result<f64> {
    spec.validate()?;
    if priors.len() != spec.labels {
        return Err(MetricError::LabelCountMismatch { found: priors.len(), expected: spec.labels });
    }
    let b2 = if spec.kind.is_jaccard() { 1.0 } else { spec.beta_sq() };
    let d = spec.default_class - 1;
    let mass = match spec.kind {
        MeasureKind::BinaryF | MeasureKind::BinaryJaccard => priors[0],
        MeasureKind::MicroMultilabelF | MeasureKind::MicroMultilabelJaccard => priors.iter().sum(),
        MeasureKind::MicroMulticlassF | MeasureKind::MicroMulticlassJaccard => 1.0 - priors[d],
        MeasureKind::MacroF => return Err(MetricError::NotPseudoLinear(spec.kind)),
    };
    if mass <= 0.0 {
        return Err(MetricError::DegenerateTask { kind: spec.kind });
    }
    Ok(1.0 / (b2 * mass))
}

/// Total misclassification cost `<a, e>`.
pub fn weighted_cost<T: Scalar>(a: &CostVector<T>, e: &ErrorProfile<T>) -> Result<T> {
    let flat = e.flatten();
    if a.a.len() != flat.len() {
        return Err(MetricError::DimensionMismatch { found: a.a.len(), expected: flat.len() });
    }
    Ok(sum(a.a.iter().zip(&flat).map(|(x, y)| x.clone() * y.clone())))
}
