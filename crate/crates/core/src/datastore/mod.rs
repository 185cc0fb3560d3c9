//! The (key → next target token) datastore.
//!
//! Built by running the base model once over every target position of a
//! parallel corpus. Retrievals become a distribution over target tokens via
//! a temperature softmax on negative distances.

mod knn;
mod store;

use thiserror::Error;

use crate::base_model::ModelError;
use crate::binio::FormatError;
use crate::vector_index::IndexError;

pub use knn::{knn_distribution, neighbor_weights, KnnDistribution};
pub use store::{
    build, merge, retrieve, Datastore, IndexKind, IndexSettings, LoadOptions, Retrieved,
    RetrievalSet, DATASTORE_MAGIC,
};

#[derive(Debug, Error)]
pub enum DatastoreError {
    #[error("{what} fingerprint mismatch: expected {expected:016x}, found {found:016x}")]
    FingerprintMismatch {
        what: &'static str,
        expected: u64,
        found: u64,
    },
    #[error("datastore would contain no entries")]
    Empty,
    #[error("incompatible datastores: {0}")]
    Incompatible(String),
    #[error("invalid kNN parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("datastore file: {0}")]
    Format(#[from] FormatError),
}

/// Retrieval and interpolation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnParams {
    /// Neighbors retrieved per step.
    pub k: usize,
    /// Softmax temperature over negative distances.
    pub temperature: f64,
    /// Coarse clusters probed per query.
    pub nprobe: usize,
    /// Weight of the kNN distribution in the interpolation.
    pub lambda: f64,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self {
            k: 64,
            temperature: 10.0,
            nprobe: 32,
            lambda: 0.5,
        }
    }
}

impl KnnParams {
    pub fn validate(&self) -> Result<(), DatastoreError> {
        if self.k == 0 {
            return Err(DatastoreError::Params("k must be at least 1".into()));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(DatastoreError::Params(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(DatastoreError::Params(format!(
                "lambda must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        if self.nprobe == 0 {
            return Err(DatastoreError::Params("nprobe must be at least 1".into()));
        }
        Ok(())
    }
}
