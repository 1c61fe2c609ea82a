use serde::{Deserialize, Serialize};

use super::SearchError;
use crate::metrics::MeasureSpec;

/// Evenly spaced levels: step `epsilon0 / phi`, with `phi` the Lipschitz
/// constant of `t -> a(t)` (`max(1, beta^2)` for F measures).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub epsilon0: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl GridSpec {
    /// The whole admissible range of `spec`.
    pub fn full(spec: &MeasureSpec, epsilon0: f64) -> Self {
        GridSpec { epsilon0, t_min: 0.0, t_max: spec.max_level() }
    }

    pub fn step(&self, spec: &MeasureSpec) -> f64 {
        self.epsilon0 / spec.lipschitz()
    }
}

/// How the levels `t` of the outer loop are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum CostGrid {
    /// `t in {0.1, 0.2, ..., 1.9}`.
    Paper,
    Step(GridSpec),
    /// Shrink `[t_min, t_max]` by five-point bracketing until its width is
    /// at most `min_width`.
    Bracket { t_min: f64, t_max: f64, min_width: f64 },
}

pub fn paper_grid() -> Vec<f64> {
    (1..=19).map(|j| j as f64 / 10.0).collect()
}

/// Levels of an arithmetic progression from `t_min` with the grid step,
/// closed with `t_max` (the last gap may be shorter).
pub fn cost_grid(spec: &MeasureSpec, grid: &GridSpec) -> Result<Vec<f64>, SearchError> {
    let step = grid.step(spec);
    if !(step.is_finite() && step > 0.0) {
        return Err(SearchError::InvalidGrid(format!("step {step} must be positive")));
    }
    if !(grid.t_min >= 0.0 && grid.t_min <= grid.t_max && grid.t_max <= spec.max_level()) {
        return Err(SearchError::InvalidGrid(format!(
            "range [{}, {}] is empty or outside [0, {}]",
            grid.t_min,
            grid.t_max,
            spec.max_level()
        )));
    }
    let mut out = Vec::new();
    let mut j = 0u32;
    loop {
        let t = grid.t_min + f64::from(j) * step;
        if t >= grid.t_max - step * 1e-9 {
            break;
        }
        out.push(t);
        j += 1;
    }
    out.push(grid.t_max);
    Ok(out)
}
