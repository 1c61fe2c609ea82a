use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Dataset, LearnError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Log,
    Hinge,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Log => "log",
            LossKind::Hinge => "hinge",
        }
    }

    fn value(self, z: f64) -> f64 {
        match self {
            LossKind::Log if z > 0.0 => (-z).exp().ln_1p(),
            LossKind::Log => -z + z.exp().ln_1p(),
            LossKind::Hinge => (1.0 - z).max(0.0),
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            LossKind::Log if z > 0.0 => {
                let e = (-z).exp();
                -e / (1.0 + e)
            }
            LossKind::Log => -1.0 / (1.0 + z.exp()),
            // zero branch at the kink
            LossKind::Hinge if z < 1.0 => -1.0,
            LossKind::Hinge => 0.0,
        }
    }
}

impl FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "log" => Ok(LossKind::Log),
            "hinge" => Ok(LossKind::Hinge),
            other => Err(format!("unknown loss `{other}` (expected log or hinge)")),
        }
    }
}

/// Correctly rounded sum of `values` (Shewchuk's algorithm).
///
/// Sums that are mathematically equal round to the same float, which makes
/// a weight-2 example and two copies of it contribute identically.
pub(crate) fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    // Round the partials to nearest, with the half-way correction.
    let Some(mut hi) = partials.pop() else { return 0.0 };
    let mut lo = 0.0;
    while let Some(y) = partials.pop() {
        let x = hi;
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if let Some(&next) = partials.last() {
        if (lo < 0.0 && next < 0.0) || (lo > 0.0 && next > 0.0) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
    }
    hi
}

/// Per-example view of the regularized weighted objective
/// `0.5 |w|^2 + C sum_i c_i s_i loss(y_i <w, x_i>)`, where `c_i` is the
/// false-negative cost on positives and the false-positive cost on
/// negatives, and `s_i` the example weight.
pub(crate) struct Problem<'a> {
    pub ds: &'a Dataset,
    pub loss: LossKind,
    pub c: f64,
    /// +1 for class 1, -1 for class 2.
    pub sign: Vec<f64>,
    /// `c_i s_i`.
    pub cost: Vec<f64>,
}

impl<'a> Problem<'a> {
    pub fn new(ds: &'a Dataset, loss: LossKind, cost_fn: f64, cost_fp: f64, c: f64) -> Result<Self, LearnError> {
        let y = ds.binary_labels()?;
        let valid = |v: f64| v.is_finite() && v >= 0.0;
        if !valid(cost_fn) || !valid(cost_fp) || (cost_fn == 0.0 && cost_fp == 0.0) {
            return Err(LearnError::InvalidCosts { cost_fn, cost_fp });
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(LearnError::InvalidRegularization(c));
        }
        let sign = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let cost = y
            .iter()
            .enumerate()
            .map(|(i, &l)| (if l == 1 { cost_fn } else { cost_fp }) * ds.weight(i))
            .collect();
        Ok(Problem { ds, loss, c, sign, cost })
    }

    pub fn dim(&self) -> usize {
        self.ds.dim() + 1
    }

    pub fn check_weights(&self, w: &[f64]) -> Result<(), LearnError> {
        if w.len() != self.dim() {
            return Err(LearnError::DimensionMismatch { expected: self.dim(), found: w.len() });
        }
        Ok(())
    }

    pub fn margins(&self, w: &[f64]) -> Vec<f64> {
        (0..self.ds.len()).map(|i| self.sign[i] * self.ds.dot(i, w)).collect()
    }

    fn value_from_margins(&self, w: &[f64], z: &[f64]) -> f64 {
        let reg = 0.5 * exact_sum(w.iter().map(|v| v * v));
        // Each weighted term enters the sum as its exact product (rounded
        // value plus FMA residual), so a weight-k example and k copies of it
        // sum to the same real number.
        let terms = z
            .iter()
            .zip(&self.cost)
            .filter(|(_, &k)| k != 0.0)
            .flat_map(|(&zi, &k)| {
                let y = self.c * self.loss.value(zi);
                let p = k * y;
                [p, k.mul_add(y, -p)]
            });
        exact_sum(std::iter::once(reg).chain(terms))
    }

    pub fn value(&self, w: &[f64]) -> f64 {
        self.value_from_margins(w, &self.margins(w))
    }

    pub fn value_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let z = self.margins(w);
        let value = self.value_from_margins(w, &z);
        let mut g = w.to_vec();
        for (i, &zi) in z.iter().enumerate() {
            let k = self.cost[i];
            if k == 0.0 {
                continue;
            }
            let d = self.loss.derivative(zi);
            if d != 0.0 {
                self.ds.axpy(i, self.c * k * d * self.sign[i], &mut g);
            }
        }
        (value, g)
    }
}

/// Value and (sub)gradient of the regularized cost-weighted objective at `w`.
///
/// All `dim + 1` weights, bias included, are regularized; a large bias value
/// makes the offset nearly free. At the hinge kink the margin term
/// contributes zero.
pub fn objective_and_gradient(
    w: &[f64],
    ds: &Dataset,
    loss: LossKind,
    cost_fn: f64,
    cost_fp: f64,
    c: f64,
) -> Result<(f64, Vec<f64>), LearnError> {
    let p = Problem::new(ds, loss, cost_fn, cost_fp, c)?;
    p.check_weights(w)?;
    let (v, g) = p.value_and_gradient(w);
    if !v.is_finite() {
        return Err(LearnError::NonFinite);
    }
    Ok((v, g))
}
