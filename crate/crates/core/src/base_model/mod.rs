//! The base translation model contract and a statistical reference model.
//!
//! A model maps a translation context (source sentence, target prefix) to a
//! distribution over the target vocabulary and to a fixed-size key vector
//! used for datastore lookups.

mod embed;
mod lexical;

use thiserror::Error;

use crate::binio::FormatError;

pub use embed::{feature_vector, FeatureEmbeddings, SOURCE_UNIGRAM, TARGET_WINDOW};
pub use lexical::{LexicalNgramModel, ModelConfig};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{side} token id {id} outside vocabulary of size {size}")]
    TokenOutOfRange {
        side: &'static str,
        id: u32,
        size: usize,
    },
    #[error("target prefix must start with BOS")]
    MissingBos,
    #[error("empty source sentence")]
    EmptySource,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("invalid model config: {0}")]
    Config(String),
    #[error("model file: {0}")]
    Format(#[from] FormatError),
}

/// Source sentence and generated target prefix (starting at BOS).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TranslationContext<'a> {
    pub source: &'a [u32],
    pub prefix: &'a [u32],
}

impl<'a> TranslationContext<'a> {
    pub fn new(source: &'a [u32], prefix: &'a [u32]) -> Self {
        Self { source, prefix }
    }
}

/// Unit-length context representation used as datastore key and query.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyVector(Vec<f32>);

impl KeyVector {
    /// Wraps raw values without normalizing.
    pub fn from_raw(values: Vec<f32>) -> Self {
        Self(values)
    }

    /// Scales `values` to unit length. Accumulates in `f64`.
    pub fn normalized(values: &[f64]) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
        Self(values.iter().map(|v| (v * scale) as f32).collect())
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt()
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub p_mt: Vec<f64>,
    pub key: KeyVector,
}

/// What the decoder and datastore need from a translation model.
pub trait TranslationModel: Send + Sync {
    fn target_vocab_size(&self) -> usize;

    fn key_dim(&self) -> usize;

    /// Identifies the model's parameters; datastores built with one model
    /// refuse to serve another.
    fn fingerprint(&self) -> u64;

    fn target_vocab_fingerprint(&self) -> u64;

    fn source_vocab_fingerprint(&self) -> u64;

    /// Next-token distribution over the full target vocabulary.
    fn distribution(&self, ctx: TranslationContext<'_>) -> Result<Vec<f64>, ModelError>;

    fn key(&self, ctx: TranslationContext<'_>) -> Result<KeyVector, ModelError>;

    fn step(&self, ctx: TranslationContext<'_>) -> Result<StepOutput, ModelError> {
        Ok(StepOutput {
            p_mt: self.distribution(ctx)?,
            key: self.key(ctx)?,
        })
    }

    /// When `Some(m)`, contexts with equal source and equal last `m` prefix
    /// tokens have identical keys. Lets callers cache retrievals.
    fn key_window(&self) -> Option<usize> {
        None
    }
}

/// Teacher-forced log-probability of `target` (BOS … EOS) given `source`.
pub fn score_sequence<M: TranslationModel + ?Sized>(
    model: &M,
    source: &[u32],
    target: &[u32],
) -> Result<f64, ModelError> {
    let mut total = 0.0;
    for i in 1..target.len() {
        let p = model.distribution(TranslationContext::new(source, &target[..i]))?;
        let y = target[i] as usize;
        let py = *p.get(y).ok_or(ModelError::TokenOutOfRange {
            side: "target",
            id: target[i],
            size: p.len(),
        })?;
        total += py.ln();
    }
    Ok(total)
}
