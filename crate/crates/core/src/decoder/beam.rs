use std::cmp::Ordering;

use rayon::prelude::*;

use super::{DecodeError, Decoder};
use crate::base_model::{TranslationContext, TranslationModel};
use crate::corpus::{BOS, EOS};

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOptions {
    pub beam: usize,
    /// Defaults to `2 · |source| + 8`.
    pub max_len: Option<usize>,
    /// Rank finished hypotheses by mean log-probability per token.
    pub length_norm: bool,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            beam: 5,
            max_len: None,
            length_norm: true,
        }
    }
}

impl DecodeOptions {
    pub fn with_beam(beam: usize) -> Self {
        Self {
            beam,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    /// BOS-prefixed; ends with EOS when finished.
    pub tokens: Vec<u32>,
    pub log_prob: f64,
    pub finished: bool,
}

impl Hypothesis {
    /// Generated tokens, BOS excluded and EOS included.
    pub fn length(&self) -> usize {
        self.tokens.len() - 1
    }

    pub fn score(&self, length_norm: bool) -> f64 {
        if length_norm {
            self.log_prob / self.length().max(1) as f64
        } else {
            self.log_prob
        }
    }

    /// Generated tokens without BOS and EOS.
    pub fn content(&self) -> &[u32] {
        let end = if self.finished {
            self.tokens.len() - 1
        } else {
            self.tokens.len()
        };
        &self.tokens[1..end]
    }
}

/// Best hypothesis of a beam search.
#[derive(Debug, Clone, PartialEq)]
pub struct Translation {
    pub tokens: Vec<u32>,
    pub score: f64,
    pub log_prob: f64,
    pub finished: bool,
}

impl Translation {
    fn from_hypothesis(h: &Hypothesis, length_norm: bool) -> Self {
        Self {
            tokens: h.content().to_vec(),
            score: h.score(length_norm),
            log_prob: h.log_prob,
            finished: h.finished,
        }
    }
}

/// Higher value first, then lexicographically smaller token sequence.
fn rank(a: (f64, &[u32]), b: (f64, &[u32])) -> Ordering {
    b.0.partial_cmp(&a.0)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.1.cmp(b.1))
}

/// Indices of the `n` largest entries of `p`, ties to the lower index.
/// Zero-probability entries are never returned.
fn top_tokens(p: &[f64], n: usize) -> Vec<(u32, f64)> {
    let mut idx: Vec<u32> = (0..p.len() as u32).filter(|&i| p[i as usize] > 0.0).collect();
    let cmp = |a: &u32, b: &u32| {
        p[*b as usize]
            .partial_cmp(&p[*a as usize])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(b))
    };
    if idx.len() > n {
        idx.select_nth_unstable_by(n - 1, cmp);
        idx.truncate(n);
    }
    idx.sort_by(cmp);
    idx.into_iter().map(|i| (i, p[i as usize])).collect()
}

impl<M: TranslationModel + ?Sized> Decoder<'_, M> {
    /// Beam search over the interpolated distribution.
    ///
    /// Live hypotheses are extended over the whole vocabulary and the best
    /// `beam` by cumulative log-probability survive; finished hypotheses are
    /// carried along unchanged and compete on the same footing. Decoding
    /// stops once every surviving hypothesis is finished or `max_len` tokens
    /// were generated. Returns the final beam ranked by score.
    pub fn beam_search(&self, source: &[u32], options: &DecodeOptions) -> Result<Vec<Hypothesis>, DecodeError> {
        if source.is_empty() {
            return Err(DecodeError::EmptySource);
        }
        if options.beam == 0 {
            return Err(DecodeError::BeamSize);
        }
        let max_len = options.max_len.unwrap_or(2 * source.len() + 8);
        if max_len == 0 {
            return Err(DecodeError::MaxLen);
        }
        let b = options.beam;
        let mut beam = vec![Hypothesis {
            tokens: vec![BOS],
            log_prob: 0.0,
            finished: false,
        }];
        for _ in 0..max_len {
            if beam.iter().all(|h| h.finished) {
                break;
            }
            let mut candidates: Vec<Hypothesis> = Vec::with_capacity(beam.len() * b);
            for h in &beam {
                if h.finished {
                    candidates.push(h.clone());
                    continue;
                }
                let dist = self.step_distribution(TranslationContext::new(source, &h.tokens))?;
                for (y, p) in top_tokens(&dist.p_final, b) {
                    let mut tokens = Vec::with_capacity(h.tokens.len() + 1);
                    tokens.extend_from_slice(&h.tokens);
                    tokens.push(y);
                    candidates.push(Hypothesis {
                        tokens,
                        log_prob: h.log_prob + p.ln(),
                        finished: y == EOS,
                    });
                }
            }
            candidates.sort_by(|x, y| rank((x.log_prob, &x.tokens), (y.log_prob, &y.tokens)));
            candidates.truncate(b);
            beam = candidates;
        }
        let norm = options.length_norm;
        beam.sort_by(|x, y| rank((x.score(norm), &x.tokens), (y.score(norm), &y.tokens)));
        Ok(beam)
    }

    /// Best translation of `source`.
    pub fn translate(&self, source: &[u32], options: &DecodeOptions) -> Result<Translation, DecodeError> {
        let ranked = self.beam_search(source, options)?;
        Ok(Translation::from_hypothesis(&ranked[0], options.length_norm))
    }

    /// Translates every source in order on `workers` threads. Failures are
    /// reported per sentence.
    pub fn translate_corpus(
        &self,
        sources: &[Vec<u32>],
        options: &DecodeOptions,
        workers: usize,
    ) -> Result<Vec<Result<Translation, DecodeError>>, DecodeError> {
        if workers <= 1 {
            return Ok(sources.iter().map(|s| self.translate(s, options)).collect());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| DecodeError::Workers(e.to_string()))?;
        Ok(pool.install(|| {
            sources
                .par_iter()
                .map(|s| self.translate(s, options))
                .collect()
        }))
    }
}
