use serde::{Deserialize, Serialize};

use super::{DecodeError, Decoder};
use crate::base_model::{TranslationContext, TranslationModel};
use crate::corpus::{Vocab, BOS, EOS};
use crate::datastore::neighbor_weights;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpNeighbor {
    pub distance: f32,
    pub value: String,
    /// This neighbor's share of the kNN softmax.
    pub prob: f64,
    #[serde(rename = "sentence-id")]
    pub sentence_id: Option<u32>,
    #[serde(rename = "step-id")]
    pub step_id: Option<u16>,
}

/// One generated step of a pure-retrieval decode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpRecord {
    /// Index of the input sentence.
    pub sentence: usize,
    pub step: usize,
    pub token: String,
    pub neighbors: Vec<DumpNeighbor>,
    /// Aggregated kNN mass of the emitted token.
    pub token_prob: f64,
}

impl<M: TranslationModel + ?Sized> Decoder<'_, M> {
    /// Greedy decode driven by `p_final` under this decoder's parameters,
    /// recording every step's neighbors. Run with `λ = 1` to inspect pure
    /// retrieval.
    pub fn dump_retrievals(
        &self,
        sentence: usize,
        source: &[u32],
        target_vocab: &Vocab,
    ) -> Result<Vec<DumpRecord>, DecodeError> {
        if source.is_empty() {
            return Err(DecodeError::EmptySource);
        }
        let max_len = 2 * source.len() + 8;
        let name = |id: u32| target_vocab.token(id).unwrap_or("<?>").to_string();
        let mut prefix = vec![BOS];
        let mut records = Vec::new();
        for step in 0..max_len {
            let dist = self.step_distribution(TranslationContext::new(source, &prefix))?;
            let (token, _) = dist
                .p_final
                .iter()
                .enumerate()
                .fold((0usize, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best });
            let token = token as u32;
            let neighbors = match &dist.retrieval {
                Some(r) => {
                    let weights = neighbor_weights(&r.distances_and_values(), self.params().temperature);
                    r.items
                        .iter()
                        .zip(weights)
                        .map(|(item, prob)| DumpNeighbor {
                            distance: item.distance,
                            value: name(item.value),
                            prob,
                            sentence_id: item.provenance.map(|p| p.0),
                            step_id: item.provenance.map(|p| p.1),
                        })
                        .collect()
                }
                None => Vec::new(),
            };
            records.push(DumpRecord {
                sentence,
                step,
                token: name(token),
                neighbors,
                token_prob: dist.p_knn.as_ref().map_or(0.0, |p| p[token as usize]),
            });
            prefix.push(token);
            if token == EOS {
                break;
            }
        }
        Ok(records)
    }
}
