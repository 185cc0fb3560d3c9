use std::collections::HashSet;

use super::distance::sq_l2;
use super::topk::{SearchResult, TopK};
use super::IndexError;
use crate::scalar::Scalar;

/// Exhaustive exact index. Serves as the oracle for the quantized index
/// and as the store for small datastores.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatIndex<S> {
    dim: usize,
    ids: Vec<u64>,
    keys: Vec<S>,
    seen: HashSet<u64>,
}

impl<S: Scalar> FlatIndex<S> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ids: Vec::new(),
            keys: Vec::new(),
            seen: HashSet::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn keys(&self) -> &[S] {
        &self.keys
    }

    pub fn key(&self, pos: usize) -> &[S] {
        &self.keys[pos * self.dim..(pos + 1) * self.dim]
    }

    /// Appends entries. The whole batch is rejected on a duplicate id.
    pub fn add<'a, I>(&mut self, entries: I) -> Result<(), IndexError>
    where
        I: IntoIterator<Item = (u64, &'a [S])>,
    {
        let batch: Vec<(u64, &[S])> = entries.into_iter().collect();
        let mut fresh = HashSet::with_capacity(batch.len());
        for (id, v) in &batch {
            if v.len() != self.dim {
                return Err(IndexError::DimensionMismatch {
                    expected: self.dim,
                    found: v.len(),
                });
            }
            if self.seen.contains(id) || !fresh.insert(*id) {
                return Err(IndexError::DuplicateId(*id));
            }
        }
        for (id, v) in batch {
            self.ids.push(id);
            self.keys.extend_from_slice(v);
        }
        self.seen.extend(fresh);
        Ok(())
    }

    /// Exact squared-L2 top-`k`.
    pub fn search(&self, query: &[S], k: usize) -> Result<SearchResult<S>, IndexError> {
        if k == 0 {
            return Err(IndexError::InvalidParam("k must be at least 1".into()));
        }
        if query.len() != self.dim {
            return Err(IndexError::DimensionMismatch {
                expected: self.dim,
                found: query.len(),
            });
        }
        if self.ids.is_empty() {
            return Ok(SearchResult::empty());
        }
        let mut top = TopK::new(k);
        for (id, key) in self.ids.iter().zip(self.keys.chunks_exact(self.dim)) {
            top.push(*id, sq_l2(query, key));
        }
        Ok(SearchResult {
            neighbors: top.into_sorted(),
            index_empty: false,
        })
    }
}

/// Free-function form of [`FlatIndex::search`].
pub fn flat_search<S: Scalar>(index: &FlatIndex<S>, query: &[S], k: usize) -> Result<SearchResult<S>, IndexError> {
    index.search(query, k)
}
