//! Dataset ingestion, the split protocol and synthetic generators.

mod galaxy;
mod libsvm;
pub mod rng;
mod split;
mod synthetic;

use thiserror::Error;

use crate::learners::LearnError;

pub use galaxy::{best_cluster_subset, generate_galaxy, Galaxy, GalaxySpec};
pub use libsvm::{parse_libsvm, parse_libsvm_with, serialize_libsvm, ParseOptions};
pub use split::{split, split_indices, Split, SplitIndices, SplitSpec};
pub use synthetic::{generate_multilabel, MultilabelSpec};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("split leaves the {0} part empty")]
    EmptyPart(&'static str),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Learn(#[from] LearnError),
}
