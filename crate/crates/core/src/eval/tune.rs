use serde::{Deserialize, Serialize};

use super::bleu::{bleu, BleuScore};
use super::EvalError;
use crate::base_model::TranslationModel;
use crate::corpus::{ParallelCorpus, Tokenizer, Vocab};
use crate::datastore::{Datastore, KnnParams};
use crate::decoder::{DecodeOptions, Decoder, RetrievalCache};

/// Sources to translate and their detokenized references.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSet {
    pub sources: Vec<Vec<u32>>,
    pub references: Vec<String>,
}

impl EvalSet {
    pub fn from_corpus(corpus: &ParallelCorpus) -> Self {
        Self {
            sources: corpus.sources(),
            references: corpus.references(),
        }
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }
}

/// Renders target ids as text.
pub fn render(tokens: &[u32], vocab: &Vocab, tokenizer: &Tokenizer) -> String {
    let words: Vec<&str> = tokens.iter().map(|&t| vocab.token(t).unwrap_or("<unk>")).collect();
    tokenizer.detokenize(&words)
}

/// Decodes and scores sets under fixed decoding options.
pub struct Evaluator<'a, M: ?Sized> {
    pub model: &'a M,
    pub target_vocab: &'a Vocab,
    pub tokenizer: &'a Tokenizer,
    pub options: DecodeOptions,
    pub workers: usize,
}

impl<M: TranslationModel + ?Sized> Evaluator<'_, M> {
    pub fn translate(
        &self,
        datastore: Option<&Datastore>,
        params: &KnnParams,
        sources: &[Vec<u32>],
        cache: Option<&RetrievalCache>,
    ) -> Result<Vec<String>, EvalError> {
        let mut decoder = Decoder::new(self.model, datastore, *params)?;
        if let Some(cache) = cache {
            decoder = decoder.with_cache(cache);
        }
        decoder
            .translate_corpus(sources, &self.options, self.workers)?
            .into_iter()
            .map(|t| Ok(render(&t?.tokens, self.target_vocab, self.tokenizer)))
            .collect()
    }

    pub fn score(
        &self,
        datastore: Option<&Datastore>,
        params: &KnnParams,
        set: &EvalSet,
        cache: Option<&RetrievalCache>,
    ) -> Result<BleuScore, EvalError> {
        let hyps = self.translate(datastore, params, &set.sources, cache)?;
        bleu(&hyps, &set.references)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneGrid {
    pub lambdas: Vec<f64>,
    pub temperatures: Vec<f64>,
}

pub const DEFAULT_TEMPERATURES: [f64; 3] = [1.0, 10.0, 100.0];

impl Default for TuneGrid {
    fn default() -> Self {
        Self {
            lambdas: (1..=9).map(|i| i as f64 / 10.0).collect(),
            temperatures: DEFAULT_TEMPERATURES.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneCell {
    pub lambda: f64,
    pub temperature: f64,
    pub bleu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    /// λ-major grid order.
    pub cells: Vec<TuneCell>,
    pub best: TuneCell,
    pub k: usize,
    pub nprobe: usize,
    pub beam: usize,
}

impl TuneResult {
    pub fn best_params(&self, base: &KnnParams) -> KnnParams {
        KnnParams {
            lambda: self.best.lambda,
            temperature: self.best.temperature,
            ..*base
        }
    }
}

/// Highest BLEU; ties go to the smaller λ, then the smaller T.
pub fn best_cell(cells: &[TuneCell]) -> Option<TuneCell> {
    cells.iter().copied().reduce(|best, c| {
        let better = c.bleu > best.bleu
            || (c.bleu == best.bleu
                && (c.lambda < best.lambda || (c.lambda == best.lambda && c.temperature < best.temperature)));
        if better {
            c
        } else {
            best
        }
    })
}

/// Scores every (λ, T) cell on `set`. `base` supplies k and nprobe.
/// Retrievals are shared across cells, so the sweep costs little more than
/// the distinct contexts it visits.
pub fn tune<M: TranslationModel + ?Sized>(
    evaluator: &Evaluator<'_, M>,
    datastore: Option<&Datastore>,
    set: &EvalSet,
    grid: &TuneGrid,
    base: &KnnParams,
) -> Result<TuneResult, EvalError> {
    if set.is_empty() {
        return Err(EvalError::EmptySet);
    }
    if grid.lambdas.is_empty() || grid.temperatures.is_empty() {
        return Err(EvalError::Config("tuning grid is empty".into()));
    }
    let cache = RetrievalCache::new();
    let mut cells = Vec::with_capacity(grid.lambdas.len() * grid.temperatures.len());
    for &lambda in &grid.lambdas {
        for &temperature in &grid.temperatures {
            let params = KnnParams {
                lambda,
                temperature,
                ..*base
            };
            let score = evaluator.score(datastore, &params, set, Some(&cache))?;
            cells.push(TuneCell {
                lambda,
                temperature,
                bleu: score.score,
            });
        }
    }
    let best = best_cell(&cells).expect("non-empty grid");
    Ok(TuneResult {
        cells,
        best,
        k: base.k,
        nprobe: base.nprobe,
        beam: evaluator.options.beam,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(lambda: f64, temperature: f64, bleu: f64) -> TuneCell {
        TuneCell {
            lambda,
            temperature,
            bleu,
        }
    }

    #[test]
    fn ties_prefer_small_lambda_then_small_t() {
        let cells = [cell(0.5, 10.0, 30.0), cell(0.3, 100.0, 30.0), cell(0.3, 10.0, 30.0), cell(0.9, 1.0, 29.0)];
        assert_eq!(best_cell(&cells), Some(cell(0.3, 10.0, 30.0)));
        assert_eq!(best_cell(&[cell(0.9, 1.0, 1.0)]), Some(cell(0.9, 1.0, 1.0)));
        assert_eq!(best_cell(&[]), None);
    }

    #[test]
    fn default_grid() {
        let g = TuneGrid::default();
        assert_eq!(g.lambdas.len(), 9);
        assert!((g.lambdas[0] - 0.1).abs() < 1e-12 && (g.lambdas[8] - 0.9).abs() < 1e-12);
        assert_eq!(g.temperatures, [1.0, 10.0, 100.0]);
    }
}
