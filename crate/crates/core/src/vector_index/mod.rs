//! Squared-L2 nearest-neighbor search: an exact flat index and an
//! inverted-file product-quantization index. Generic over the float type.

mod distance;
mod flat;
mod io;
mod ivfpq;
mod kmeans;
mod pq;
mod topk;

use std::io::Write;

use thiserror::Error;

use crate::binio::{FormatError, Reader, Writer};
use crate::scalar::Scalar;

pub use distance::{dot, nearest, sq_l2, BlockedCentroids};
pub use flat::{flat_search, FlatIndex};
pub use io::{FLAT_MAGIC, IVFPQ_MAGIC};
pub use ivfpq::{default_clusters, training_sample, IvfPqConfig, IvfPqIndex, TRAIN_POINTS_PER_CLUSTER};
pub use kmeans::{kmeans, KMeans, KMeansParams};
pub use pq::{ProductQuantizer, CODEBOOK_SIZE};
pub use topk::{Neighbor, SearchResult, TopK};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("{points} training points cannot form {clusters} clusters; lower the cluster count")]
    TooFewPoints { points: usize, clusters: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid index config: {0}")]
    InvalidConfig(String),
    #[error("invalid search parameter: {0}")]
    InvalidParam(String),
    #[error("duplicate entry id {0}")]
    DuplicateId(u64),
    #[error("index is not trained")]
    Untrained,
    #[error("index file: {0}")]
    Format(#[from] FormatError),
}

/// Either index kind behind one search interface.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorIndex<S> {
    Flat(FlatIndex<S>),
    IvfPq(IvfPqIndex<S>),
}

impl<S: Scalar> VectorIndex<S> {
    pub fn dim(&self) -> usize {
        match self {
            Self::Flat(f) => f.dim(),
            Self::IvfPq(i) => i.dim(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Flat(f) => f.len(),
            Self::IvfPq(i) => i.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `nprobe` is ignored by the flat index.
    pub fn search(&self, query: &[S], k: usize, nprobe: usize) -> Result<SearchResult<S>, IndexError> {
        match self {
            Self::Flat(f) => f.search(query, k),
            Self::IvfPq(i) => i.search(query, k, nprobe),
        }
    }

    pub fn add<'a, I>(&mut self, entries: I) -> Result<(), IndexError>
    where
        I: IntoIterator<Item = (u64, &'a [S])>,
    {
        match self {
            Self::Flat(f) => f.add(entries),
            Self::IvfPq(i) => i.add(entries),
        }
    }

    /// Stored keys: exact for the flat index, reconstructions for IVF-PQ.
    pub fn entries(&self) -> Vec<(u64, Vec<S>)> {
        match self {
            Self::Flat(f) => f
                .ids()
                .iter()
                .enumerate()
                .map(|(i, id)| (*id, f.key(i).to_vec()))
                .collect(),
            Self::IvfPq(i) => i.reconstruct_all(),
        }
    }
}

impl VectorIndex<f32> {
    pub fn write_to<W: Write>(&self, w: &mut Writer<W>) -> std::io::Result<()> {
        match self {
            Self::Flat(f) => f.write_to(w),
            Self::IvfPq(i) => i.write_to(w),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut Writer::new(&mut out)).expect("in-memory write");
        out
    }

    /// Dispatches on the leading magic (`flat-v1` or `ivfpq-v1`) and
    /// requires the buffer to hold exactly one index.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IndexError> {
        let mut r = Reader::new(bytes);
        let idx = if bytes.starts_with(FLAT_MAGIC.as_bytes()) {
            Self::Flat(FlatIndex::read_from(&mut r)?)
        } else {
            Self::IvfPq(IvfPqIndex::read_from(&mut r)?)
        };
        r.expect_end()?;
        Ok(idx)
    }
}
