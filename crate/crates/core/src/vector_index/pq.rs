//! Product quantization: one byte per subspace.

use rayon::prelude::*;

use super::distance::{dot, sq_l2, BlockedCentroids};
use super::kmeans::{kmeans, KMeansParams};
use super::IndexError;
use crate::scalar::Scalar;

/// Upper bound on centroids per subspace (one byte per code).
pub const CODEBOOK_SIZE: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct ProductQuantizer<S> {
    dim: usize,
    n_sub: usize,
    ksub: usize,
    /// `n_sub × ksub × dsub`.
    codebooks: Vec<S>,
    blocked: Vec<BlockedCentroids<S>>,
}

impl<S: Scalar> ProductQuantizer<S> {
    /// Trains one codebook per subspace. With fewer than 256 training rows
    /// the codebooks shrink to the sample size.
    pub fn train(data: &[S], dim: usize, n_sub: usize, params: &KMeansParams) -> Result<Self, IndexError> {
        if n_sub == 0 || dim % n_sub != 0 {
            return Err(IndexError::InvalidConfig(format!(
                "dimension {dim} is not divisible by {n_sub} sub-quantizers"
            )));
        }
        let n = data.len() / dim;
        if n == 0 {
            return Err(IndexError::TooFewPoints { points: 0, clusters: 1 });
        }
        let dsub = dim / n_sub;
        let ksub = n.min(CODEBOOK_SIZE);
        let mut codebooks = Vec::with_capacity(n_sub * ksub * dsub);
        for s in 0..n_sub {
            let sub: Vec<S> = data
                .chunks_exact(dim)
                .flat_map(|v| v[s * dsub..(s + 1) * dsub].iter().copied())
                .collect();
            let p = KMeansParams {
                seed: params.seed.wrapping_add(1 + s as u64),
                ..params.clone()
            };
            codebooks.extend(kmeans(&sub, dsub, ksub, &p)?.centroids);
        }
        Ok(Self::assemble(dim, n_sub, ksub, codebooks))
    }

    pub fn from_parts(dim: usize, n_sub: usize, ksub: usize, codebooks: Vec<S>) -> Result<Self, IndexError> {
        if n_sub == 0 || dim % n_sub != 0 || ksub == 0 || ksub > CODEBOOK_SIZE {
            return Err(IndexError::InvalidConfig("bad quantizer shape".into()));
        }
        if codebooks.len() != dim * ksub {
            return Err(IndexError::InvalidConfig("codebook size mismatch".into()));
        }
        Ok(Self::assemble(dim, n_sub, ksub, codebooks))
    }

    fn assemble(dim: usize, n_sub: usize, ksub: usize, codebooks: Vec<S>) -> Self {
        let dsub = dim / n_sub;
        let blocked = codebooks
            .chunks_exact(ksub * dsub)
            .map(|book| BlockedCentroids::new(book, dsub))
            .collect();
        Self {
            dim,
            n_sub,
            ksub,
            codebooks,
            blocked,
        }
    }

    pub fn n_sub(&self) -> usize {
        self.n_sub
    }

    pub fn ksub(&self) -> usize {
        self.ksub
    }

    pub fn dsub(&self) -> usize {
        self.dim / self.n_sub
    }

    pub fn codebooks(&self) -> &[S] {
        &self.codebooks
    }

    fn book(&self, s: usize) -> &[S] {
        let len = self.ksub * self.dsub();
        &self.codebooks[s * len..(s + 1) * len]
    }

    pub fn encode_into(&self, v: &[S], out: &mut [u8]) {
        let dsub = self.dsub();
        for (s, code) in out.iter_mut().enumerate() {
            *code = self.blocked[s].nearest(&v[s * dsub..(s + 1) * dsub]).0 as u8;
        }
    }

    pub fn encode(&self, v: &[S]) -> Vec<u8> {
        let mut out = vec![0u8; self.n_sub];
        self.encode_into(v, &mut out);
        out
    }

    /// Encodes many rows in parallel.
    pub fn encode_many(&self, data: &[S]) -> Vec<u8> {
        let mut out = vec![0u8; data.len() / self.dim * self.n_sub];
        out.par_chunks_mut(self.n_sub)
            .zip(data.par_chunks_exact(self.dim))
            .for_each(|(o, v)| self.encode_into(v, o));
        out
    }

    pub fn decode(&self, code: &[u8]) -> Vec<S> {
        let dsub = self.dsub();
        let mut out = Vec::with_capacity(self.dim);
        for (s, &c) in code.iter().enumerate() {
            let c = c as usize;
            out.extend_from_slice(&self.book(s)[c * dsub..(c + 1) * dsub]);
        }
        out
    }

    /// Per-subspace squared distances from `query` to every codeword;
    /// `n_sub × ksub`.
    pub fn lookup_table(&self, query: &[S]) -> Vec<S> {
        let dsub = self.dsub();
        let mut lut = Vec::with_capacity(self.n_sub * self.ksub);
        for s in 0..self.n_sub {
            let q = &query[s * dsub..(s + 1) * dsub];
            lut.extend(self.book(s).chunks_exact(dsub).map(|c| sq_l2(q, c)));
        }
        lut
    }

    /// `‖r‖² + 2⟨c, r⟩` for every codeword `r`, where `c` is the matching
    /// slice of `centroid`; `n_sub × ksub`. Together with
    /// [`Self::inner_table`] this gives residual distances without a table
    /// per cluster: `‖q − c − r‖² = ‖q − c‖² + (‖r‖² + 2⟨c, r⟩) − 2⟨q, r⟩`.
    pub fn centroid_terms(&self, centroid: &[S]) -> Vec<S> {
        let dsub = self.dsub();
        let two = S::of(2.0);
        let mut out = Vec::with_capacity(self.n_sub * self.ksub);
        for s in 0..self.n_sub {
            let c = &centroid[s * dsub..(s + 1) * dsub];
            out.extend(self.book(s).chunks_exact(dsub).map(|r| dot(r, r) + two * dot(c, r)));
        }
        out
    }

    /// `−2⟨q, r⟩` for every codeword `r`; `n_sub × ksub`.
    pub fn inner_table(&self, query: &[S]) -> Vec<S> {
        let dsub = self.dsub();
        let minus_two = S::of(-2.0);
        let mut out = Vec::with_capacity(self.n_sub * self.ksub);
        for s in 0..self.n_sub {
            let q = &query[s * dsub..(s + 1) * dsub];
            out.extend(self.book(s).chunks_exact(dsub).map(|r| minus_two * dot(q, r)));
        }
        out
    }

    /// Sum of two tables' entries selected by the code.
    #[inline]
    pub fn adc2(&self, a: &[S], b: &[S], code: &[u8]) -> S {
        let mut acc = S::zero();
        for (s, &c) in code.iter().enumerate() {
            let j = s * self.ksub + c as usize;
            acc += a[j] + b[j];
        }
        acc
    }

    /// Asymmetric distance: sums table entries selected by the code.
    #[inline]
    pub fn adc(&self, lut: &[S], code: &[u8]) -> S {
        let mut acc = S::zero();
        for (s, &c) in code.iter().enumerate() {
            acc += lut[s * self.ksub + c as usize];
        }
        acc
    }
}
