//! Command-line front end.
//!
//! Every flag can also come from an environment variable named
//! `KNNMT_<FLAG>` (upper case, dashes as underscores) or from a flat
//! `key = value` file passed with `--config`. Precedence: flags, then
//! environment, then config file, then built-in defaults.
//!
//! Exit codes: 0 ok, 1 internal error, 2 usage or I/O error, 3 fingerprint
//! or configuration mismatch.

mod args;
mod artifacts;
mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;

use clap::{CommandFactory, Parser, Subcommand};
use thiserror::Error;

use crate::base_model::ModelError;
use crate::corpus::CorpusError;
use crate::datastore::DatastoreError;
use crate::decoder::DecodeError;
use crate::eval::EvalError;
use crate::vector_index::IndexError;

pub use args::{
    BenchArgs, BleuArgs, BuildArgs, CorpusArgs, DecodeArgs, ExperimentArgs, ExperimentKind, FitArgs, IndexArgs,
    KnnArgs, LearnBpeArgs, SynthArgs, TranslateArgs, TuneArgs,
};
pub use artifacts::{sidecar, ModelBundle};

/// Prefix of the environment variables that mirror flags.
pub const ENV_PREFIX: &str = "KNNMT_";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "knnmt", version, about = "Nearest-neighbor machine translation", args_override_self = true)]
pub struct Cli {
    /// Flat `key = value` file supplying flag values for the subcommand
    #[arg(long, global = true, env = "KNNMT_CONFIG", value_name = "FILE")]
    pub config: Option<std::path::PathBuf>,

    /// Worker threads for corpus-level parallelism; never changes outputs
    #[arg(long, global = true, env = "KNNMT_WORKERS", default_value_t = 1)]
    pub workers: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic parallel corpus (TSV)
    Synth(SynthArgs),
    /// Learn BPE merges from a corpus
    LearnBpe(LearnBpeArgs),
    /// Fit the base translation model
    Fit(FitArgs),
    /// Build a datastore over a corpus with a fitted model
    BuildDatastore(BuildArgs),
    /// Translate lines, optionally with a datastore
    Translate(TranslateArgs),
    /// Corpus BLEU of hypotheses against references
    Bleu(BleuArgs),
    /// Grid-search lambda and temperature on a validation corpus
    Tune(TuneArgs),
    /// Run one of the synthetic experiments and write its reports
    Experiment(ExperimentArgs),
    /// Time retrieval and decoding on a large synthetic datastore
    Bench(BenchArgs),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Mismatch(_) => EXIT_MISMATCH,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    /// Prefixes the message with the file it concerns.
    pub(crate) fn at(self, path: &std::path::Path) -> Self {
        let p = path.display();
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{p}: {m}")),
            CliError::Mismatch(m) => CliError::Mismatch(format!("{p}: {m}")),
            CliError::Internal(m) => CliError::Internal(format!("{p}: {m}")),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::TokenOutOfRange { .. } | ModelError::MissingBos => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> Self {
        match e {
            IndexError::DimensionMismatch { .. } => CliError::Mismatch(e.to_string()),
            IndexError::DuplicateId(_) | IndexError::Untrained => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<DatastoreError> for CliError {
    fn from(e: DatastoreError) -> Self {
        match e {
            DatastoreError::FingerprintMismatch { .. } | DatastoreError::Incompatible(_) => {
                CliError::Mismatch(e.to_string())
            }
            DatastoreError::Index(e) => e.into(),
            DatastoreError::Model(e) => e.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<DecodeError> for CliError {
    fn from(e: DecodeError) -> Self {
        match e {
            DecodeError::Model(e) => e.into(),
            DecodeError::Datastore(e) => e.into(),
            DecodeError::Workers(_) => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Decode(e) => e.into(),
            EvalError::Datastore(e) => e.into(),
            EvalError::Model(e) => e.into(),
            EvalError::Corpus(e) => e.into(),
            EvalError::Report(_) => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match config::apply_config_file(&Cli::command(), args) {
        Ok(a) => a,
        Err(e) => return report(e),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> i32 {
    let _ = std::io::stdout().flush();
    eprintln!("error: {e}");
    e.exit_code()
}
