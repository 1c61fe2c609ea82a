//! Exact enumeration over finite distributions: every deterministic
//! classifier's error profile, the Pareto front, the part of it reachable by
//! weighted sums, and executable checks of the cost reduction and its
//! approximation bound.

mod checks;
mod distribution;
mod enumerate;
mod hull;

use thiserror::Error;

use crate::metrics::MetricError;

pub use checks::{
    phi_bound_witness, verify_reduction, verify_reduction_on, PhiWitness, PhiWitnessConfig, ReductionReport,
    GAP_TOLERANCE,
};
pub use distribution::{figure_distribution, parse_distribution, parse_rational, FiniteDistribution, Point, FIGURE_FIXTURE};
pub use enumerate::{enumerate_profiles, profile_of, Assignment, ProfileSet, DEFAULT_CAP};
pub use hull::{best_for_cost, hull_candidates, pareto_front, select};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParetoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("{radix}^{points} classifiers exceed the enumeration cap of {cap}")]
    CapExceeded { cap: u64, points: usize, radix: u64 },
    #[error("the geometric hull routine needs a binary profile set")]
    NotBinary,
    #[error("the measure is undefined on every profile")]
    Undefined,
    #[error(transparent)]
    Metric(#[from] MetricError),
}
