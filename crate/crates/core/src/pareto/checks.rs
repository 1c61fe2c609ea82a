use rand::RngCore;
use serde::Serialize;

use super::{best_for_cost, enumerate_profiles, FiniteDistribution, ParetoError, ProfileSet, DEFAULT_CAP};
use crate::data::rng;
use crate::metrics::{cost_vector, discretization_factor, measure_value, weighted_cost, MeasureSpec, Scalar};

/// Outcome of checking that the F-optimal profiles are exactly the
/// minimizers of the cost vector taken at the optimal level.
#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    pub f_star: f64,
    pub cost: Vec<f64>,
    pub argmax: Vec<usize>,
    pub argmin: Vec<usize>,
    /// F-optimal profiles that do not minimize the cost.
    pub missing: Vec<usize>,
    /// Cost minimizers that are not F-optimal.
    pub suboptimal: Vec<usize>,
}

impl ReductionReport {
    pub fn holds(&self) -> bool {
        self.missing.is_empty() && self.suboptimal.is_empty()
    }
}

fn values<T: Scalar>(ps: &ProfileSet<T>, spec: &MeasureSpec) -> Vec<Option<T>> {
    ps.entries.iter().map(|(_, e)| measure_value(spec, e).ok()).collect()
}

fn best<T: Scalar>(values: &[Option<T>]) -> Result<T, ParetoError> {
    values
        .iter()
        .flatten()
        .cloned()
        .reduce(|m, v| if v > m { v } else { m })
        .ok_or(ParetoError::Undefined)
}

pub fn verify_reduction<T: Scalar>(dist: &FiniteDistribution<T>, spec: &MeasureSpec) -> Result<ReductionReport, ParetoError> {
    let ps = enumerate_profiles(dist, DEFAULT_CAP)?;
    verify_reduction_on(&ps, &dist.priors(), spec)
}

/// [`verify_reduction`] on an already enumerated set with priors `priors`.
pub fn verify_reduction_on<T: Scalar>(
    ps: &ProfileSet<T>,
    priors: &[T],
    spec: &MeasureSpec,
) -> Result<ReductionReport, ParetoError> {
    // without positive mass F* is 0 and a(0) leaves false positives free,
    // so undefined profiles would tie with the optimum
    discretization_factor(spec, &priors.iter().map(Scalar::approx).collect::<Vec<_>>())?;
    let f = values(ps, spec);
    let f_star = best(&f)?;
    let a = cost_vector(spec, f_star.clone(), priors)?;
    let tol = T::slack();
    let argmax: Vec<usize> = (0..f.len())
        .filter(|&i| f[i].as_ref().is_some_and(|v| (v.clone() - f_star.clone()).abs() <= tol))
        .collect();
    let argmin = best_for_cost(ps, &a)?;
    Ok(ReductionReport {
        f_star: f_star.approx(),
        cost: a.a.iter().map(Scalar::approx).collect(),
        missing: argmax.iter().copied().filter(|i| !argmin.contains(i)).collect(),
        suboptimal: argmin.iter().copied().filter(|i| !argmax.contains(i)).collect(),
        argmax,
        argmin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiWitnessConfig {
    pub epsilon0: f64,
    pub epsilon1: f64,
    /// Number of perturbed cost vectors.
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiWitness {
    pub phi: f64,
    pub max_norm: f64,
    pub bound: f64,
    /// Largest `(F* - F(e)) / bound` seen (0 when the bound is 0 and every
    /// gap vanishes).
    pub max_ratio: f64,
    pub max_gap: f64,
    /// `(cost vector, profile)` pairs examined.
    pub checks: usize,
    pub violations: usize,
}

pub const GAP_TOLERANCE: f64 = 1e-12;

/// Perturbs the optimal cost vector inside the `epsilon0` ball (uniformly,
/// negative entries clipped to zero) and checks every `epsilon1`-optimal
/// profile of each perturbation against `F* - F(e) <= Phi (2 epsilon0 M +
/// epsilon1)`.
pub fn phi_bound_witness(
    dist: &FiniteDistribution<f64>,
    spec: &MeasureSpec,
    cfg: &PhiWitnessConfig,
) -> Result<PhiWitness, ParetoError> {
    if !(cfg.epsilon0 >= 0.0 && cfg.epsilon1 >= 0.0) {
        return Err(ParetoError::InvalidDistribution("epsilons must be non-negative".into()));
    }
    let ps = enumerate_profiles(dist, DEFAULT_CAP)?;
    let priors = dist.priors();
    let f = values(&ps, spec);
    let f_star = best(&f)?;
    let a_star = cost_vector(spec, f_star, &priors)?;
    let phi = discretization_factor(spec, &priors)?;
    let bound = phi * (2.0 * cfg.epsilon0 * ps.max_norm + cfg.epsilon1);
    let dim = a_star.a.len();

    let mut r = rng::stream(cfg.seed, 0);
    let mut out = PhiWitness { phi, max_norm: ps.max_norm, bound, max_ratio: 0.0, max_gap: 0.0, checks: 0, violations: 0 };
    for _ in 0..cfg.samples {
        let mut a_hat = a_star.clone();
        for (ai, di) in a_hat.a.iter_mut().zip(ball_sample(&mut r, dim, cfg.epsilon0)) {
            *ai = (*ai + di).max(0.0);
        }
        let costs = ps.entries.iter().map(|(_, e)| weighted_cost(&a_hat, e)).collect::<Result<Vec<_>, _>>()?;
        let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
        for (i, c) in costs.iter().enumerate() {
            if *c > min + cfg.epsilon1 {
                continue;
            }
            out.checks += 1;
            let Some(fe) = f[i] else {
                out.violations += 1;
                continue;
            };
            let gap = f_star - fe;
            out.max_gap = out.max_gap.max(gap);
            if gap > bound + GAP_TOLERANCE {
                out.violations += 1;
            }
            if bound > 0.0 {
                out.max_ratio = out.max_ratio.max(gap / bound);
            }
        }
    }
    Ok(out)
}

/// Uniform draw from the `dim`-dimensional ball of radius `radius`.
fn ball_sample(r: &mut impl RngCore, dim: usize, radius: f64) -> Vec<f64> {
    if radius == 0.0 {
        return vec![0.0; dim];
    }
    let dir: Vec<f64> = (0..dim).map(|_| rng::gaussian(r)).collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = radius * rng::uniform(r).powf(1.0 / dim as f64) / norm.max(f64::MIN_POSITIVE);
    dir.into_iter().map(|x| x * scale).collect()
}
