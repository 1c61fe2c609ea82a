use std::collections::VecDeque;

use log::debug;
use serde::{Deserialize, Serialize};

use super::objective::Problem;
use super::{Dataset, LearnError, LinearModel, LossKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    /// L-BFGS for both losses.
    Auto,
    Lbfgs,
    GradientDescent,
    /// Hinge loss only. Slow when the bias value is large, since the bias
    /// couples every pair of examples.
    DualCoordinateDescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_iterations: usize,
    /// Stop once `|g| <= gradient_tolerance * max(1, |g_0|)`.
    pub gradient_tolerance: f64,
    /// Dual coordinate descent stops once every projected dual gradient is
    /// within this distance of zero.
    pub dual_tolerance: f64,
    pub solver: Solver,
    /// L-BFGS history length.
    pub memory: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_iterations: 50_000,
            gradient_tolerance: 1e-6,
            dual_tolerance: 0.1,
            solver: Solver::Auto,
            memory: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        if self.max_iterations == 0
            || !(self.gradient_tolerance.is_finite() && self.gradient_tolerance > 0.0)
            || !(self.dual_tolerance.is_finite() && self.dual_tolerance > 0.0)
            || self.memory == 0
        {
            return Err(LearnError::InvalidConfig(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainStatus {
    Converged,
    MaxIterations,
    /// The line search could not decrease the objective any further.
    Stalled,
    /// No training took place (e.g. a label absent from the data).
    Trivial,
}

impl TrainStatus {
    pub fn name(self) -> &'static str {
        match self {
            TrainStatus::Converged => "converged",
            TrainStatus::MaxIterations => "max-iterations",
            TrainStatus::Stalled => "stalled",
            TrainStatus::Trivial => "trivial",
        }
    }
}

/// Trained model plus the objective value after every accepted step.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LinearModel,
    pub objective_trace: Vec<f64>,
}

/// Trains a cost-weighted L2-regularized linear classifier from zero
/// weights. Deterministic: no randomness is involved.
pub fn train_weighted_linear(
    ds: &Dataset,
    loss: LossKind,
    cost_fn: f64,
    cost_fp: f64,
    c: f64,
    cfg: &TrainConfig,
) -> Result<LinearModel, LearnError> {
    train_with_trace(ds, loss, cost_fn, cost_fp, c, cfg).map(|o| o.model)
}

pub fn train_with_trace(
    ds: &Dataset,
    loss: LossKind,
    cost_fn: f64,
    cost_fp: f64,
    c: f64,
    cfg: &TrainConfig,
) -> Result<TrainOutcome, LearnError> {
    cfg.validate()?;
    let problem = Problem::new(ds, loss, cost_fn, cost_fp, c)?;
    let solver = match (cfg.solver, loss) {
        (Solver::Auto, _) => Solver::Lbfgs,
        (Solver::DualCoordinateDescent, LossKind::Log) => {
            return Err(LearnError::InvalidConfig("dual coordinate descent needs hinge loss".into()))
        }
        (s, _) => s,
    };
    let run = match solver {
        Solver::DualCoordinateDescent => dual_cd(&problem, cfg),
        Solver::GradientDescent => descent(&problem, cfg, 0),
        _ => descent(&problem, cfg, cfg.memory),
    }?;
    debug!(
        "trained {} C={c} costs=({cost_fn}, {cost_fp}): {:?} after {} iterations, objective {}",
        loss.name(),
        run.status,
        run.iterations,
        run.trace.last().copied().unwrap_or(f64::NAN)
    );
    let objective = *run.trace.last().expect("trace starts with the initial objective");
    Ok(TrainOutcome {
        model: LinearModel {
            weights: run.weights,
            threshold: 0.0,
            loss,
            cost_fn,
            cost_fp,
            trained_cost: None,
            c,
            status: run.status,
            iterations: run.iterations,
            objective,
        },
        objective_trace: run.trace,
    })
}

struct Run {
    weights: Vec<f64>,
    status: TrainStatus,
    iterations: usize,
    trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Quasi-Newton descent with Armijo backtracking; `memory == 0` gives plain
/// gradient descent.
fn descent(p: &Problem<'_>, cfg: &TrainConfig, memory: usize) -> Result<Run, LearnError> {
    const ARMIJO: f64 = 1e-4;
    const MAX_BACKTRACKS: usize = 60;

    let mut w = vec![0.0; p.dim()];
    let (mut f, mut g) = p.value_and_gradient(&w);
    if !f.is_finite() {
        return Err(LearnError::NonFinite);
    }
    let stop = cfg.gradient_tolerance * norm(&g).max(1.0);
    let mut trace = vec![f];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(memory);
    let mut step_hint = 1.0 / norm(&g).max(1.0);

    for iteration in 0..cfg.max_iterations {
        if norm(&g) <= stop {
            return Ok(Run { weights: w, status: TrainStatus::Converged, iterations: iteration, trace });
        }
        let mut d = two_loop(&g, &history);
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            history.clear();
            d = g.iter().map(|x| -x).collect();
            slope = dot(&g, &d);
        }
        let mut alpha = if history.is_empty() { step_hint } else { 1.0 };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let cand: Vec<f64> = w.iter().zip(&d).map(|(wi, di)| wi + alpha * di).collect();
            let fc = p.value(&cand);
            if fc.is_finite() && fc <= f + ARMIJO * alpha * slope {
                accepted = Some((cand, fc));
                break;
            }
            alpha *= 0.5;
        }
        let Some((next, fn_next)) = accepted else {
            if !history.is_empty() {
                // retry from steepest descent before giving up
                history.clear();
                continue;
            }
            return Ok(Run { weights: w, status: TrainStatus::Stalled, iterations: iteration, trace });
        };
        if fn_next >= f {
            return Ok(Run { weights: w, status: TrainStatus::Stalled, iterations: iteration, trace });
        }
        let (_, g_next) = p.value_and_gradient(&next);
        if memory > 0 {
            let s: Vec<f64> = next.iter().zip(&w).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-12 * norm(&s) * norm(&y) {
                if history.len() == memory {
                    history.pop_front();
                }
                history.push_back((s, y, 1.0 / sy));
            }
        } else {
            step_hint = alpha * 2.0;
        }
        if memory > 0 && history.is_empty() {
            step_hint = alpha * 2.0;
        }
        w = next;
        f = fn_next;
        g = g_next;
        trace.push(f);
    }
    let status = if norm(&g) <= stop { TrainStatus::Converged } else { TrainStatus::MaxIterations };
    Ok(Run { weights: w, status, iterations: cfg.max_iterations, trace })
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|qi| *qi *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}

/// Cyclic dual coordinate descent for the hinge loss. Each example's dual
/// variable lives in `[0, C c_i s_i]`. The primal objective is evaluated
/// after every epoch and the best iterate so far is kept, so the recorded
/// trace is non-increasing.
fn dual_cd(p: &Problem<'_>, cfg: &TrainConfig) -> Result<Run, LearnError> {
    let n = p.ds.len();
    let upper: Vec<f64> = p.cost.iter().map(|k| p.c * k).collect();
    let diag: Vec<f64> = (0..n).map(|i| p.ds.sq_norm(i)).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; p.dim()];
    let mut best_w = w.clone();
    let mut best_f = p.value(&w);
    if !best_f.is_finite() {
        return Err(LearnError::NonFinite);
    }
    let mut trace = vec![best_f];

    for epoch in 0..cfg.max_iterations {
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            if upper[i] == 0.0 || diag[i] == 0.0 {
                continue;
            }
            let grad = p.sign[i] * p.ds.dot(i, &w) - 1.0;
            let pg = if alpha[i] == 0.0 {
                grad.min(0.0)
            } else if alpha[i] == upper[i] {
                grad.max(0.0)
            } else {
                grad
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let next = (alpha[i] - grad / diag[i]).clamp(0.0, upper[i]);
                p.ds.axpy(i, (next - alpha[i]) * p.sign[i], &mut w);
                alpha[i] = next;
            }
        }
        let f = p.value(&w);
        if !f.is_finite() {
            return Err(LearnError::NonFinite);
        }
        if f < best_f {
            best_f = f;
            best_w.clone_from(&w);
            trace.push(f);
        }
        if pg_max <= cfg.dual_tolerance && pg_min >= -cfg.dual_tolerance {
            return Ok(Run { weights: best_w, status: TrainStatus::Converged, iterations: epoch + 1, trace });
        }
    }
    Ok(Run { weights: best_w, status: TrainStatus::MaxIterations, iterations: cfg.max_iterations, trace })
}
