//! Inverted-file index with product-quantized residuals.
//!
//! Keys are partitioned by a coarse k-means quantizer. Each entry stores the
//! PQ code of its residual from the coarse centroid; the full-precision key
//! is discarded. Search probes the `nprobe` closest clusters and ranks their
//! entries by asymmetric distance through per-subspace lookup tables.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::distance::{sq_l2, BlockedCentroids};
use super::kmeans::{kmeans, KMeansParams};
use super::pq::ProductQuantizer;
use super::topk::{SearchResult, TopK};
use super::IndexError;
use crate::scalar::Scalar;

/// Training rows drawn per coarse cluster.
pub const TRAIN_POINTS_PER_CLUSTER: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct IvfPqConfig {
    pub clusters: usize,
    pub sub_quantizers: usize,
    pub kmeans: KMeansParams,
    /// Quantize `key − centroid` rather than the key itself.
    pub residual: bool,
    /// Debug mode: store keys unquantized so distances are exact.
    pub identity: bool,
}

impl Default for IvfPqConfig {
    fn default() -> Self {
        Self {
            clusters: 256,
            sub_quantizers: 16,
            kmeans: KMeansParams::default(),
            residual: true,
            identity: false,
        }
    }
}

/// Cluster count used when none is given: 256 under a million keys, 4096
/// from a million up, never more than one cluster per 32 keys.
pub fn default_clusters(num_keys: usize) -> usize {
    let base = if num_keys >= 1_000_000 { 4096 } else { 256 };
    base.min((num_keys / 32).max(1))
}

/// Row indices to train on: all rows when there are at most
/// `256 · clusters`, otherwise a seeded sample of that size, sorted.
pub fn training_sample(num_rows: usize, clusters: usize, seed: u64) -> Vec<usize> {
    let cap = clusters.saturating_mul(TRAIN_POINTS_PER_CLUSTER);
    if num_rows <= cap {
        return (0..num_rows).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5a3b_1e00_u64);
    let mut idx = sample(&mut rng, num_rows, cap).into_vec();
    idx.sort_unstable();
    idx
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Encoding<S> {
    Pq(ProductQuantizer<S>),
    Identity,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub(crate) struct Posting<S> {
    pub ids: Vec<u64>,
    /// `n_sub` bytes per entry (PQ mode).
    pub codes: Vec<u8>,
    /// `dim` values per entry (identity mode).
    pub vectors: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvfPqIndex<S> {
    dim: usize,
    pub(crate) config: IvfPqConfig,
    pub(crate) centroids: Vec<S>,
    pub(crate) encoding: Option<Encoding<S>>,
    pub(crate) postings: Vec<Posting<S>>,
    seen: HashSet<u64>,
    /// Per-cluster [`ProductQuantizer::centroid_terms`] (residual PQ only).
    terms: Vec<Vec<S>>,
    blocked: Option<BlockedCentroids<S>>,
}

impl<S: Scalar> IvfPqIndex<S> {
    pub fn new(dim: usize, config: IvfPqConfig) -> Result<Self, IndexError> {
        if dim == 0 {
            return Err(IndexError::InvalidConfig("dimension must be positive".into()));
        }
        if config.sub_quantizers == 0 || dim % config.sub_quantizers != 0 {
            return Err(IndexError::InvalidConfig(format!(
                "dimension {dim} is not divisible by {} sub-quantizers",
                config.sub_quantizers
            )));
        }
        if config.clusters == 0 {
            return Err(IndexError::InvalidConfig("need at least one cluster".into()));
        }
        Ok(Self {
            dim,
            config,
            centroids: Vec::new(),
            encoding: None,
            postings: Vec::new(),
            seen: HashSet::new(),
            terms: Vec::new(),
            blocked: None,
        })
    }

    fn refresh_terms(&mut self) {
        self.blocked = (!self.centroids.is_empty()).then(|| BlockedCentroids::new(&self.centroids, self.dim));
        self.terms = match &self.encoding {
            Some(Encoding::Pq(pq)) if self.config.residual => self
                .centroids
                .chunks_exact(self.dim)
                .map(|c| pq.centroid_terms(c))
                .collect(),
            _ => Vec::new(),
        };
    }

    pub(crate) fn from_parts(
        dim: usize,
        config: IvfPqConfig,
        centroids: Vec<S>,
        encoding: Option<Encoding<S>>,
        postings: Vec<Posting<S>>,
    ) -> Result<Self, IndexError> {
        let mut idx = Self::new(dim, config)?;
        let mut seen = HashSet::new();
        for p in &postings {
            for &id in &p.ids {
                if !seen.insert(id) {
                    return Err(IndexError::DuplicateId(id));
                }
            }
        }
        idx.centroids = centroids;
        idx.encoding = encoding;
        idx.postings = postings;
        idx.seen = seen;
        idx.refresh_terms();
        Ok(idx)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn config(&self) -> &IvfPqConfig {
        &self.config
    }

    pub fn is_trained(&self) -> bool {
        self.encoding.is_some()
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.centroids.len() / self.dim
    }

    pub fn centroids(&self) -> &[S] {
        &self.centroids
    }

    pub fn posting_sizes(&self) -> Vec<usize> {
        self.postings.iter().map(|p| p.ids.len()).collect()
    }

    /// Learns the coarse centroids and the residual codebooks.
    pub fn train(&mut self, sample: &[S]) -> Result<(), IndexError> {
        if sample.len() % self.dim != 0 {
            return Err(IndexError::DimensionMismatch {
                expected: self.dim,
                found: sample.len(),
            });
        }
        let n = sample.len() / self.dim;
        let c = self.config.clusters;
        if n < c {
            return Err(IndexError::TooFewPoints { points: n, clusters: c });
        }
        let coarse = kmeans(sample, self.dim, c, &self.config.kmeans)?;
        let encoding = if self.config.identity {
            Encoding::Identity
        } else {
            let residuals: Vec<S> = if self.config.residual {
                let mut r = Vec::with_capacity(sample.len());
                for (v, &a) in sample.chunks_exact(self.dim).zip(&coarse.assignments) {
                    r.extend(v.iter().zip(coarse.centroid(a)).map(|(&x, &m)| x - m));
                }
                r
            } else {
                sample.to_vec()
            };
            let params = KMeansParams {
                seed: self.config.kmeans.seed.wrapping_mul(31).wrapping_add(17),
                ..self.config.kmeans.clone()
            };
            Encoding::Pq(ProductQuantizer::train(
                &residuals,
                self.dim,
                self.config.sub_quantizers,
                &params,
            )?)
        };
        self.centroids = coarse.centroids;
        self.encoding = Some(encoding);
        self.postings = vec![Posting::default(); c];
        self.seen.clear();
        self.refresh_terms();
        Ok(())
    }

    /// Assigns each key to its nearest coarse centroid and stores its code.
    /// Posting lists stay sorted by id. A duplicate id rejects the batch.
    pub fn add<'a, I>(&mut self, entries: I) -> Result<(), IndexError>
    where
        I: IntoIterator<Item = (u64, &'a [S])>,
    {
        let encoding = self.encoding.as_ref().ok_or(IndexError::Untrained)?;
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
        let dim = self.dim;
        let centroids = &self.centroids;
        let blocked = self.blocked.as_ref().ok_or(IndexError::Untrained)?;
        let residual = self.config.residual;
        let encoded: Vec<(usize, Vec<u8>)> = batch
            .par_iter()
            .map(|(_, v)| {
                let (c, _) = blocked.nearest(v);
                let code = match encoding {
                    Encoding::Identity => Vec::new(),
                    Encoding::Pq(pq) if residual => {
                        let r: Vec<S> = v
                            .iter()
                            .zip(&centroids[c * dim..(c + 1) * dim])
                            .map(|(&x, &m)| x - m)
                            .collect();
                        pq.encode(&r)
                    }
                    Encoding::Pq(pq) => pq.encode(v),
                };
                (c, code)
            })
            .collect();
        let mut touched = vec![false; self.postings.len()];
        for ((id, v), (c, code)) in batch.iter().zip(encoded) {
            let p = &mut self.postings[c];
            p.ids.push(*id);
            match encoding {
                Encoding::Identity => p.vectors.extend_from_slice(v),
                Encoding::Pq(_) => p.codes.extend_from_slice(&code),
            }
            touched[c] = true;
        }
        let width = match encoding {
            Encoding::Identity => dim,
            Encoding::Pq(pq) => pq.n_sub(),
        };
        for (c, t) in touched.into_iter().enumerate() {
            if t {
                sort_posting(&mut self.postings[c], width);
            }
        }
        self.seen.extend(fresh);
        Ok(())
    }

    /// Approximate top-`k` by scanning the `nprobe` nearest clusters.
    /// `nprobe` above the cluster count is clamped.
    pub fn search(&self, query: &[S], k: usize, nprobe: usize) -> Result<SearchResult<S>, IndexError> {
        if k == 0 {
            return Err(IndexError::InvalidParam("k must be at least 1".into()));
        }
        if nprobe == 0 {
            return Err(IndexError::InvalidParam("nprobe must be at least 1".into()));
        }
        if query.len() != self.dim {
            return Err(IndexError::DimensionMismatch {
                expected: self.dim,
                found: query.len(),
            });
        }
        let Some(encoding) = &self.encoding else {
            return Ok(SearchResult::empty());
        };
        if self.seen.is_empty() {
            return Ok(SearchResult::empty());
        }
        let dim = self.dim;
        let mut coarse: Vec<(S, usize)> = self
            .centroids
            .chunks_exact(dim)
            .enumerate()
            .map(|(i, c)| (sq_l2(query, c), i))
            .collect();
        let nprobe = nprobe.min(coarse.len());
        let by_dist = |a: &(S, usize), b: &(S, usize)| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        };
        if nprobe < coarse.len() {
            coarse.select_nth_unstable_by(nprobe - 1, by_dist);
            coarse.truncate(nprobe);
        }
        coarse.sort_by(by_dist);

        let mut top = TopK::new(k);
        let table = match encoding {
            Encoding::Pq(pq) if self.config.residual => pq.inner_table(query),
            Encoding::Pq(pq) => pq.lookup_table(query),
            Encoding::Identity => Vec::new(),
        };
        for &(coarse_dist, c) in &coarse {
            let posting = &self.postings[c];
            if posting.ids.is_empty() {
                continue;
            }
            match encoding {
                Encoding::Identity => {
                    for (id, v) in posting.ids.iter().zip(posting.vectors.chunks_exact(dim)) {
                        top.push(*id, sq_l2(query, v));
                    }
                }
                Encoding::Pq(pq) => {
                    let codes = posting.ids.iter().zip(posting.codes.chunks_exact(pq.n_sub()));
                    if self.config.residual {
                        let terms = &self.terms[c];
                        for (id, code) in codes {
                            let d = coarse_dist + pq.adc2(&table, terms, code);
                            if top.worst().is_none_or(|w| d <= w) {
                                top.push(*id, d);
                            }
                        }
                    } else {
                        for (id, code) in codes {
                            let d = pq.adc(&table, code);
                            if top.worst().is_none_or(|w| d <= w) {
                                top.push(*id, d);
                            }
                        }
                    }
                }
            }
        }
        Ok(SearchResult {
            neighbors: top.into_sorted(),
            index_empty: false,
        })
    }

    /// Approximate key of every entry (centroid plus decoded residual), in
    /// cluster order.
    pub fn reconstruct_all(&self) -> Vec<(u64, Vec<S>)> {
        let Some(encoding) = &self.encoding else {
            return Vec::new();
        };
        let dim = self.dim;
        let mut out = Vec::with_capacity(self.len());
        for (c, p) in self.postings.iter().enumerate() {
            let centroid = &self.centroids[c * dim..(c + 1) * dim];
            match encoding {
                Encoding::Identity => {
                    for (id, v) in p.ids.iter().zip(p.vectors.chunks_exact(dim)) {
                        out.push((*id, v.to_vec()));
                    }
                }
                Encoding::Pq(pq) => {
                    for (id, code) in p.ids.iter().zip(p.codes.chunks_exact(pq.n_sub())) {
                        let mut v = pq.decode(code);
                        if self.config.residual {
                            for (x, &m) in v.iter_mut().zip(centroid) {
                                *x += m;
                            }
                        }
                        out.push((*id, v));
                    }
                }
            }
        }
        out
    }

    /// Reconstruction of one stored entry, if present.
    pub fn reconstruct(&self, id: u64) -> Option<Vec<S>> {
        if !self.seen.contains(&id) {
            return None;
        }
        self.reconstruct_all()
            .into_iter()
            .find_map(|(i, v)| (i == id).then_some(v))
    }
}

fn sort_posting<S: Scalar>(p: &mut Posting<S>, width: usize) {
    if p.ids.windows(2).all(|w| w[0] < w[1]) {
        return;
    }
    let mut order: Vec<usize> = (0..p.ids.len()).collect();
    order.sort_unstable_by_key(|&i| p.ids[i]);
    p.ids = order.iter().map(|&i| p.ids[i]).collect();
    if !p.codes.is_empty() {
        p.codes = order
            .iter()
            .flat_map(|&i| p.codes[i * width..(i + 1) * width].iter().copied())
            .collect();
    }
    if !p.vectors.is_empty() {
        p.vectors = order
            .iter()
            .flat_map(|&i| p.vectors[i * width..(i + 1) * width].iter().copied())
            .collect();
    }
}
