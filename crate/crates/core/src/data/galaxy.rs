use serde::{Deserialize, Serialize};

use super::{rng, DataError};
use crate::learners::{Dataset, Labels, DEFAULT_BIAS};

/// Four isotropic Gaussian clusters in the plane with cluster-dependent
/// positive rates. One cluster is rare but almost always positive, one is
/// common but rarely positive, and the largest is never positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalaxySpec {
    pub n: usize,
    pub seed: u64,
    pub priors: [f64; 4],
    pub positive_rates: [f64; 4],
    pub centers: [[f64; 2]; 4],
    pub spread: f64,
    pub bias: f64,
}

impl GalaxySpec {
    pub fn new(n: usize, seed: u64) -> Self {
        GalaxySpec {
            n,
            seed,
            priors: [0.01, 0.1, 0.001, 0.889],
            positive_rates: [0.9, 0.09, 0.9, 0.0],
            centers: [[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [4.0, 4.0]],
            spread: 0.5,
            bias: DEFAULT_BIAS,
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let total: f64 = self.priors.iter().sum();
        if self.n == 0
            || (total - 1.0).abs() > 1e-12
            || self.priors.iter().any(|p| !(0.0..=1.0).contains(p))
            || self.positive_rates.iter().any(|p| !(0.0..=1.0).contains(p))
            || !(self.spread.is_finite() && self.spread >= 0.0)
        {
            return Err(DataError::InvalidSpec(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Galaxy {
    pub dataset: Dataset,
    /// Cluster of each example, 1-based.
    pub clusters: Vec<u8>,
}

/// Draws a Galaxy sample: cluster, then label, then position, per example,
/// from one ChaCha8 stream.
pub fn generate_galaxy(spec: &GalaxySpec) -> Result<Galaxy, DataError> {
    spec.validate()?;
    let mut r = rng::stream(spec.seed, 0);
    let mut rows = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    let mut clusters = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let z = rng::categorical(&mut r, &spec.priors);
        let positive = rng::uniform(&mut r) < spec.positive_rates[z];
        let [cx, cy] = spec.centers[z];
        let x = cx + spec.spread * rng::gaussian(&mut r);
        let y = cy + spec.spread * rng::gaussian(&mut r);
        rows.push(vec![(1, x), (2, y)]);
        labels.push(if positive { 1 } else { 2 });
        clusters.push(z as u8 + 1);
    }
    let dataset = Dataset::new(rows, Labels::Binary(labels), 2, spec.bias)?;
    Ok(Galaxy { dataset, clusters })
}

/// Best population F-beta over the rules that predict positive on a union
/// of clusters. Returns the 1-based clusters of the best union and its value.
pub fn best_cluster_subset(priors: &[f64], positive_rates: &[f64], beta: f64) -> (Vec<usize>, f64) {
    let k = priors.len();
    let b2 = beta * beta;
    let p1: f64 = priors.iter().zip(positive_rates).map(|(p, r)| p * r).sum();
    let mut best = (Vec::new(), 0.0);
    for mask in 1u32..(1 << k) {
        let members: Vec<usize> = (0..k).filter(|&c| mask & (1 << c) != 0).collect();
        let tp: f64 = members.iter().map(|&c| priors[c] * positive_rates[c]).sum();
        let predicted: f64 = members.iter().map(|&c| priors[c]).sum();
        let f = (1.0 + b2) * tp / (b2 * p1 + predicted);
        if f > best.1 {
            best = (members.iter().map(|c| c + 1).collect(), f);
        }
    }
    best
}
