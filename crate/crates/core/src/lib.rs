//! Maximizing pseudo-linear performance measures (F-beta and Jaccard
//! families) through a searched family of cost-sensitive linear problems.
//!
//! * [`metrics`]: error profiles, measures, level-set cost vectors.
//! * [`learners`]: cost-weighted L2-regularized linear classifiers and
//!   threshold tuning.
//! * [`search`]: cost grids, the outer optimization loops and bracketing.
//! * [`pareto`]: exact enumeration over finite distributions.
//! * [`data`]: sparse text datasets, splits and synthetic generators.

pub mod data;
pub mod learners;
pub mod metrics;
pub mod pareto;
pub mod search;

pub use metrics::{CostVector, ErrorProfile, MeasureKind, MeasureSpec, Scalar, Targets};
