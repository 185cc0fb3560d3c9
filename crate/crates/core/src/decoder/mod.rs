//! Autoregressive decoding over the interpolated distribution
//! `p = λ · p_kNN + (1 − λ) · p_MT`.

mod beam;
mod cache;
mod dump;

use std::sync::Arc;

use thiserror::Error;

use crate::base_model::{ModelError, TranslationContext, TranslationModel};
use crate::datastore::{knn_distribution, Datastore, DatastoreError, KnnParams, RetrievalSet};
use crate::scalar::Scalar;

pub use beam::{DecodeOptions, Hypothesis, Translation};
pub use cache::RetrievalCache;
pub use dump::{DumpNeighbor, DumpRecord};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("empty source sentence")]
    EmptySource,
    #[error("beam size must be at least 1")]
    BeamSize,
    #[error("max length must be at least 1")]
    MaxLen,
    #[error("worker pool: {0}")]
    Workers(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Datastore(#[from] DatastoreError),
}

/// The three distributions at one decoding step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistribution {
    pub p_mt: Vec<f64>,
    /// `None` when no retrieval was performed (λ = 0 or no datastore).
    pub p_knn: Option<Vec<f64>>,
    pub p_final: Vec<f64>,
    /// Retrieval ran but found nothing; `p_final` fell back to `p_mt`.
    pub knn_empty: bool,
    pub retrieval: Option<Arc<RetrievalSet>>,
}

/// Convex combination `λ · p_knn + (1 − λ) · p_mt`, elementwise.
pub fn interpolate<S: Scalar>(p_knn: &[S], p_mt: &[S], lambda: S) -> Vec<S> {
    let rest = S::one() - lambda;
    p_knn
        .iter()
        .zip(p_mt)
        .map(|(&k, &m)| lambda * k + rest * m)
        .collect()
}

/// A base model, an optional datastore and the kNN settings.
pub struct Decoder<'a, M: ?Sized> {
    model: &'a M,
    datastore: Option<&'a Datastore>,
    params: KnnParams,
    cache: Option<&'a RetrievalCache>,
}

impl<'a, M: TranslationModel + ?Sized> Decoder<'a, M> {
    /// Validates `params` and that the datastore was built with `model`.
    pub fn new(model: &'a M, datastore: Option<&'a Datastore>, params: KnnParams) -> Result<Self, DecodeError> {
        params.validate()?;
        if let Some(ds) = datastore {
            ds.check_model(model)?;
        }
        Ok(Self {
            model,
            datastore,
            params,
            cache: None,
        })
    }

    /// Skips the fingerprint check (documented override for mismatched stores).
    pub fn new_unchecked(model: &'a M, datastore: Option<&'a Datastore>, params: KnnParams) -> Result<Self, DecodeError> {
        params.validate()?;
        Ok(Self {
            model,
            datastore,
            params,
            cache: None,
        })
    }

    /// Shares retrievals between calls. The cache must only ever be used with
    /// this datastore and the same `k`/`nprobe`.
    pub fn with_cache(mut self, cache: &'a RetrievalCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn params(&self) -> &KnnParams {
        &self.params
    }

    pub fn model(&self) -> &M {
        self.model
    }

    fn retrieval(&self, ds: &Datastore, ctx: TranslationContext<'_>) -> Result<Arc<RetrievalSet>, DecodeError> {
        let fetch = || -> Result<RetrievalSet, DecodeError> {
            let key = self.model.key(ctx)?;
            Ok(ds.retrieve(&key, &self.params)?)
        };
        match (self.cache, self.model.key_window()) {
            (Some(cache), Some(window)) => cache.get_or_insert(ctx, window, fetch),
            _ => Ok(Arc::new(fetch()?)),
        }
    }

    /// One retrieval per context serves every candidate next token.
    pub fn step_distribution(&self, ctx: TranslationContext<'_>) -> Result<StepDistribution, DecodeError> {
        let p_mt = self.model.distribution(ctx)?;
        let ds = match self.datastore {
            Some(ds) if self.params.lambda > 0.0 => ds,
            _ => {
                return Ok(StepDistribution {
                    p_final: p_mt.clone(),
                    p_mt,
                    p_knn: None,
                    knn_empty: false,
                    retrieval: None,
                })
            }
        };
        let retrieval = self.retrieval(ds, ctx)?;
        let knn = knn_distribution(
            &retrieval.distances_and_values(),
            self.params.temperature,
            p_mt.len(),
        );
        let p_final = if knn.empty {
            p_mt.clone()
        } else {
            interpolate(&knn.probs, &p_mt, self.params.lambda)
        };
        Ok(StepDistribution {
            p_mt,
            p_knn: Some(knn.probs),
            p_final,
            knn_empty: knn.empty,
            retrieval: Some(retrieval),
        })
    }
}

/// Free-function form of [`Decoder::step_distribution`].
pub fn step_distribution<M: TranslationModel + ?Sized>(
    model: &M,
    datastore: Option<&Datastore>,
    ctx: TranslationContext<'_>,
    params: &KnnParams,
) -> Result<StepDistribution, DecodeError> {
    Decoder::new(model, datastore, *params)?.step_distribution(ctx)
}

/// Free-function form of [`Decoder::beam_search`].
pub fn beam_search<M: TranslationModel + ?Sized>(
    model: &M,
    datastore: Option<&Datastore>,
    source: &[u32],
    params: &KnnParams,
    options: &DecodeOptions,
) -> Result<Vec<Hypothesis>, DecodeError> {
    Decoder::new(model, datastore, *params)?.beam_search(source, options)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_arithmetic() {
        let p = interpolate(&[1.0f64, 0.0], &[0.2, 0.8], 0.5);
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.4).abs() < 1e-15);
        let q = interpolate(&[1.0f32, 0.0], &[0.2, 0.8], 0.0);
        assert_eq!(q, [0.2, 0.8]);
    }
}
