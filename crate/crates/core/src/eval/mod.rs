//! BLEU scoring, (λ, T) tuning and the synthetic experiment suite.

pub mod bench;
pub mod bleu;
pub mod experiments;
pub mod synth;
pub mod tune;

use std::path::PathBuf;

use thiserror::Error;

use crate::base_model::ModelError;
use crate::corpus::CorpusError;
use crate::datastore::DatastoreError;
use crate::decoder::DecodeError;

pub use bench::{run_bench, BenchConfig, BenchReport, DecodeTiming, LatencyStats};
pub use bleu::{bleu, tokenize_13a, BleuScore, SIGNATURE};
pub use synth::{DomainConfig, Language, SynthConfig};
pub use tune::{best_cell, render, tune, EvalSet, Evaluator, TuneCell, TuneGrid, TuneResult};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{hypotheses} hypotheses but {references} references")]
    LineCount { hypotheses: usize, references: usize },
    #[error("evaluation set is empty")]
    EmptySet,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("report serialization: {0}")]
    Report(String),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Datastore(#[from] DatastoreError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}
