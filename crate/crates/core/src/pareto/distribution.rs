use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Zero};

use super::ParetoError;
use crate::metrics::{Scalar, Task};

/// A point of the input space: its mass and the conditional label
/// probabilities there.
///
/// `probs` holds `P(y = 1 | x)` alone for binary tasks, `P(y = k | x)` for
/// every class of a multiclass task, and `P(k in Y | x)` for every label of
/// a multilabel task.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<T> {
    pub mass: T,
    pub probs: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution<T = BigRational> {
    task: Task,
    labels: usize,
    points: Vec<Point<T>>,
}

impl<T: Scalar> FiniteDistribution<T> {
    /// `labels` is the class count for multiclass tasks and the label count
    /// for multilabel tasks; binary tasks have 2.
    pub fn new(task: Task, labels: usize, points: Vec<Point<T>>) -> Result<Self, ParetoError> {
        let bad = |m: String| Err(ParetoError::InvalidDistribution(m));
        if points.is_empty() {
            return bad("no points".into());
        }
        let width = match task {
            Task::Binary if labels == 2 => 1,
            Task::Binary => return bad("binary distributions have 2 labels".into()),
            Task::Multiclass if labels >= 2 => labels,
            Task::Multilabel if labels >= 1 => labels,
            _ => return bad(format!("{labels} labels is too few for {task:?}")),
        };
        let tol = T::slack();
        let (zero, one) = (T::zero(), T::one());
        let mut total = T::zero();
        for (i, p) in points.iter().enumerate() {
            if p.probs.len() != width {
                return bad(format!("point {i} has {} probabilities, expected {width}", p.probs.len()));
            }
            if p.mass <= zero || p.mass > one.clone() + tol.clone() {
                return bad(format!("point {i} has mass outside (0, 1]"));
            }
            if p.probs.iter().any(|q| *q < zero.clone() - tol.clone() || *q > one.clone() + tol.clone()) {
                return bad(format!("point {i} has a probability outside [0, 1]"));
            }
            if task == Task::Multiclass {
                let s = p.probs.iter().fold(T::zero(), |a, q| a + q.clone());
                if (s - one.clone()).abs() > tol {
                    return bad(format!("class probabilities of point {i} do not sum to 1"));
                }
            }
            total = total + p.mass.clone();
        }
        if (total - one).abs() > tol {
            return bad("masses do not sum to 1".into());
        }
        Ok(FiniteDistribution { task, labels, points })
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    /// Class or label priors `P_k`.
    pub fn priors(&self) -> Vec<T> {
        let mut priors = vec![T::zero(); self.labels];
        for p in &self.points {
            match self.task {
                Task::Binary => {
                    priors[0] = priors[0].clone() + p.mass.clone() * p.probs[0].clone();
                    priors[1] = priors[1].clone() + p.mass.clone() * (T::one() - p.probs[0].clone());
                }
                _ => {
                    for (k, q) in p.probs.iter().enumerate() {
                        priors[k] = priors[k].clone() + p.mass.clone() * q.clone();
                    }
                }
            }
        }
        priors
    }

    pub fn to_f64(&self) -> FiniteDistribution<f64> {
        FiniteDistribution {
            task: self.task,
            labels: self.labels,
            points: self
                .points
                .iter()
                .map(|p| Point { mass: p.mass.approx(), probs: p.probs.iter().map(Scalar::approx).collect() })
                .collect(),
        }
    }
}

/// Exact value of a decimal (`0.65`, `-1.5e-3`) or a fraction (`13/20`).
pub fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        return (!d.is_zero()).then(|| BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&all).ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= Pow::pow(&ten, scale as u32);
    } else {
        value /= Pow::pow(&ten, (-scale) as u32);
    }
    Some(if neg { -value } else { value })
}

/// Reads the table format: one point per line, `mass p(1|x)` for binary
/// tasks and `mass p_1 ... p_L` otherwise; `#` starts a comment.
/// Numbers are read exactly.
pub fn parse_distribution(text: &str, task: Task) -> Result<FiniteDistribution<BigRational>, ParetoError> {
    let mut points = Vec::new();
    let mut width = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| ParetoError::Parse { line: lineno + 1, message: m };
        let values = line
            .split_whitespace()
            .map(|tok| parse_rational(tok).ok_or_else(|| err(format!("not a number: `{tok}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() < 2 {
            return Err(err("expected a mass followed by probabilities".into()));
        }
        if *width.get_or_insert(values.len()) != values.len() {
            return Err(err("rows have different lengths".into()));
        }
        let mut it = values.into_iter();
        let mass = it.next().expect("checked length");
        points.push(Point { mass, probs: it.collect() });
    }
    let width = width.ok_or(ParetoError::InvalidDistribution("no points".into()))? - 1;
    let labels = match task {
        Task::Binary if width == 1 => 2,
        Task::Binary => {
            return Err(ParetoError::InvalidDistribution("binary rows are `mass p(1|x)`".into()));
        }
        _ => width,
    };
    FiniteDistribution::new(task, labels, points)
}

/// The three-point distribution of the bundled fixture.
pub fn figure_distribution() -> FiniteDistribution<BigRational> {
    parse_distribution(FIGURE_FIXTURE, Task::Binary).expect("bundled fixture is valid")
}

pub const FIGURE_FIXTURE: &str = include_str!("../../fixtures/figure.dist");
