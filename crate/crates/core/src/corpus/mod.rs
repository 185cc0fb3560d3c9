//! Parallel text ingestion, tokenization and vocabularies.

mod bpe;
mod parallel;
mod tokenize;
mod vocab;

use std::io;
use std::path::Path;

use thiserror::Error;

pub use bpe::{detokenize_bpe, BpeModel, END_OF_WORD};
pub use parallel::{
    build_vocabs, count_tokens, encode, load_parallel, load_parallel_with_vocabs, provenance,
    read_pairs, tokenize_pairs, LoadStats, ParallelCorpus, ParallelFormat, Provenance,
    SentencePair, TokenizedRow, TokenizedText, TokenizerConfig, DEFAULT_MAX_LEN,
};
pub use tokenize::{tokenize_line, Tokenizer};
pub use vocab::{Vocab, BOS, EOS, NUM_RESERVED, PAD, RESERVED_TOKENS, UNK};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("no usable rows after tokenization and length filtering")]
    NoUsableRows,
    #[error("vocabulary: {0}")]
    Vocab(String),
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Learns a BPE model from raw lines.
pub fn learn_bpe<S: AsRef<str>>(lines: &[S], num_merges: usize) -> Result<BpeModel, CorpusError> {
    BpeModel::learn(lines, num_merges)
}
