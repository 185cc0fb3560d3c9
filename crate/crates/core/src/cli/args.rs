use std::path::PathBuf;

use clap::{Args, ValueEnum};

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// Parallel corpus with one `source<TAB>target` pair per line
    #[arg(long, env = "KNNMT_CORPUS", value_name = "TSV")]
    pub corpus: Option<PathBuf>,

    /// Source side as a line-aligned file (use with --target)
    #[arg(long, env = "KNNMT_SOURCE", value_name = "FILE", requires = "target")]
    pub source: Option<PathBuf>,

    /// Target side as a line-aligned file (use with --source)
    #[arg(long, env = "KNNMT_TARGET", value_name = "FILE", requires = "source")]
    pub target: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct KnnArgs {
    /// Neighbors retrieved per decoding step
    #[arg(long, env = "KNNMT_K", default_value_t = 64)]
    pub k: usize,

    /// Coarse clusters probed per query (clamped to the cluster count)
    #[arg(long, env = "KNNMT_NPROBE", default_value_t = 32)]
    pub nprobe: usize,
}

#[derive(Debug, Clone, Args)]
pub struct DecodeArgs {
    /// Beam size
    #[arg(long, env = "KNNMT_BEAM", default_value_t = 5)]
    pub beam: usize,

    /// Maximum generated tokens per sentence [default: 2 x source length + 8]
    #[arg(long, env = "KNNMT_MAX_OUTPUT_LEN", value_name = "N")]
    pub max_output_len: Option<usize>,

    /// Rank finished hypotheses by total log-probability instead of the
    /// per-token mean
    #[arg(long, env = "KNNMT_NO_LENGTH_NORM")]
    pub no_length_norm: bool,
}

#[derive(Debug, Clone, Args)]
pub struct IndexArgs {
    /// Exact flat index over full-precision keys
    #[arg(long, env = "KNNMT_FLAT")]
    pub flat: bool,

    /// Coarse clusters [default: 256 below 1M entries, 4096 above, at most entries/32]
    #[arg(long, env = "KNNMT_CLUSTERS", value_name = "C")]
    pub clusters: Option<usize>,

    /// Bytes per product-quantized code (sub-quantizers)
    #[arg(long, env = "KNNMT_PQ_BYTES", default_value_t = 16)]
    pub pq_bytes: usize,

    /// Debug: keep keys unquantized inside the IVF index
    #[arg(long, env = "KNNMT_IDENTITY_PQ")]
    pub identity_pq: bool,

    /// k-means iterations for coarse and PQ codebooks
    #[arg(long, env = "KNNMT_KMEANS_ITERS", default_value_t = 20)]
    pub kmeans_iters: usize,

    /// Do not store (sentence, step) provenance per entry
    #[arg(long, env = "KNNMT_NO_PROVENANCE")]
    pub no_provenance: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Output TSV
    #[arg(long, env = "KNNMT_OUT", value_name = "TSV")]
    pub out: PathBuf,

    /// Sentence pairs to write
    #[arg(long, env = "KNNMT_SENTENCES", default_value_t = 5000)]
    pub sentences: usize,

    /// Domains the language defines
    #[arg(long, env = "KNNMT_DOMAINS", value_delimiter = ',', default_value = "medical,legal")]
    pub domains: Vec<String>,

    /// Sample from this domain instead of the general language
    #[arg(long, env = "KNNMT_DOMAIN")]
    pub domain: Option<String>,

    /// Label mixed into the sampling seed so splits differ (e.g. train, valid, test)
    #[arg(long, env = "KNNMT_PART", default_value = "train")]
    pub part: String,

    /// Language and sampling seed [default: random, printed]
    #[arg(long, env = "KNNMT_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct LearnBpeArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,

    /// Number of merges
    #[arg(long, env = "KNNMT_MERGES", default_value_t = 1000)]
    pub merges: usize,

    /// Output merges file
    #[arg(long, env = "KNNMT_OUT", value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,

    /// Output model file; vocabularies and tokenizer settings are written
    /// next to it
    #[arg(long, env = "KNNMT_MODEL", value_name = "FILE")]
    pub model: PathBuf,

    /// BPE merges file (from learn-bpe); whitespace tokens otherwise
    #[arg(long, env = "KNNMT_BPE", value_name = "FILE")]
    pub bpe: Option<PathBuf>,

    /// Drop pairs whose id sequences (with BOS/EOS) exceed this length
    #[arg(long, env = "KNNMT_MAX_LEN", default_value_t = 256)]
    pub max_len: usize,

    /// One vocabulary for both languages
    #[arg(long, env = "KNNMT_SHARED_VOCAB")]
    pub shared_vocab: bool,

    /// Weight of the lexical table against the bigram LM
    #[arg(long, env = "KNNMT_MIX", default_value_t = 0.5)]
    pub mix: f64,

    /// Add-alpha smoothing
    #[arg(long, env = "KNNMT_ALPHA", default_value_t = 0.1)]
    pub alpha: f64,

    /// Trailing target tokens feeding the key
    #[arg(long, env = "KNNMT_WINDOW", default_value_t = 2)]
    pub window: usize,

    /// Key dimension
    #[arg(long, env = "KNNMT_DIM", default_value_t = 64)]
    pub dim: usize,

    /// Weight of source features in the key
    #[arg(long, env = "KNNMT_SOURCE_WEIGHT", default_value_t = 1.0)]
    pub source_weight: f64,

    /// Weight of target-prefix features in the key
    #[arg(long, env = "KNNMT_TARGET_WEIGHT", default_value_t = 2.0)]
    pub target_weight: f64,

    /// Embedding seed [default: random, printed]
    #[arg(long, env = "KNNMT_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    /// Fitted model
    #[arg(long, env = "KNNMT_MODEL", value_name = "FILE")]
    pub model: PathBuf,

    #[command(flatten)]
    pub corpus: CorpusArgs,

    /// Output datastore file
    #[arg(long, env = "KNNMT_OUT", value_name = "FILE")]
    pub out: PathBuf,

    #[command(flatten)]
    pub index: IndexArgs,

    /// Index training seed [default: random, printed]
    #[arg(long, env = "KNNMT_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct TranslateArgs {
    /// Fitted model
    #[arg(long, env = "KNNMT_MODEL", value_name = "FILE")]
    pub model: PathBuf,

    /// Datastore; without one decoding uses the base model alone (lambda 0)
    #[arg(long, env = "KNNMT_DATASTORE", value_name = "FILE")]
    pub datastore: Option<PathBuf>,

    /// Source lines, `-` for stdin
    #[arg(long, env = "KNNMT_INPUT", default_value = "-")]
    pub input: PathBuf,

    /// Translations, `-` for stdout
    #[arg(long, env = "KNNMT_OUTPUT", default_value = "-")]
    pub output: PathBuf,

    #[command(flatten)]
    pub knn: KnnArgs,

    /// Interpolation weight of the kNN distribution
    #[arg(long, env = "KNNMT_LAMBDA", default_value_t = 0.5)]
    pub lambda: f64,

    /// Softmax temperature over negative distances
    #[arg(long, env = "KNNMT_TEMPERATURE", default_value_t = 10.0)]
    pub temperature: f64,

    #[command(flatten)]
    pub decode: DecodeArgs,

    /// Write per-step retrievals of a greedy decode as JSON lines
    #[arg(long, env = "KNNMT_DUMP_RETRIEVALS", value_name = "FILE")]
    pub dump_retrievals: Option<PathBuf>,

    /// Serve a datastore built with a different model
    #[arg(long, env = "KNNMT_ALLOW_FINGERPRINT_MISMATCH")]
    pub allow_fingerprint_mismatch: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BleuArgs {
    /// System output, one detokenized line per segment
    #[arg(long, env = "KNNMT_HYPOTHESES", value_name = "FILE")]
    pub hypotheses: PathBuf,

    /// References, line-aligned with the hypotheses
    #[arg(long, env = "KNNMT_REFERENCES", value_name = "FILE")]
    pub references: PathBuf,

    /// Print the score as JSON
    #[arg(long, env = "KNNMT_JSON")]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TuneArgs {
    /// Fitted model
    #[arg(long, env = "KNNMT_MODEL", value_name = "FILE")]
    pub model: PathBuf,

    /// Datastore
    #[arg(long, env = "KNNMT_DATASTORE", value_name = "FILE")]
    pub datastore: PathBuf,

    /// Validation corpus
    #[command(flatten)]
    pub corpus: CorpusArgs,

    #[command(flatten)]
    pub knn: KnnArgs,

    /// Interpolation weights to try
    #[arg(long, env = "KNNMT_LAMBDAS", value_delimiter = ',',
          default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    pub lambdas: Vec<f64>,

    /// Temperatures to try
    #[arg(long, env = "KNNMT_TEMPERATURES", value_delimiter = ',', default_value = "1,10,100")]
    pub temperatures: Vec<f64>,

    #[command(flatten)]
    pub decode: DecodeArgs,

    /// JSON report
    #[arg(long, env = "KNNMT_OUT", value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    /// Base model vs tuned kNN-MT on held-out data of the training distribution
    InDomain,
    /// One general model, per-domain datastores
    DomainAdaptation,
    /// BLEU over nested datastore fractions
    SizeAblation,
    /// BLEU over a k x temperature grid
    KTSweep,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// Experiment to run
    #[arg(value_enum)]
    pub kind: ExperimentKind,

    /// Directory for the JSON, text and CSV reports
    #[arg(long, env = "KNNMT_OUT_DIR", value_name = "DIR")]
    pub out_dir: PathBuf,

    /// Number of seeds (consecutive from --seed)
    #[arg(long, env = "KNNMT_SEEDS", default_value_t = 5)]
    pub seeds: usize,

    /// First seed [default: random, printed]
    #[arg(long, env = "KNNMT_SEED")]
    pub seed: Option<u64>,

    /// Training pairs of the general language
    #[arg(long, env = "KNNMT_TRAIN", default_value_t = 5000)]
    pub train: usize,

    /// Validation pairs per distribution
    #[arg(long, env = "KNNMT_VALID", default_value_t = 200)]
    pub valid: usize,

    /// Test pairs per distribution
    #[arg(long, env = "KNNMT_TEST", default_value_t = 500)]
    pub test: usize,

    /// Training pairs per domain
    #[arg(long, env = "KNNMT_DOMAIN_TRAIN", default_value_t = 2000)]
    pub domain_train: usize,

    /// Domains of the synthetic language
    #[arg(long, env = "KNNMT_DOMAINS", value_delimiter = ',', default_value = "medical,legal")]
    pub domains: Vec<String>,

    #[command(flatten)]
    pub knn: KnnArgs,

    /// Tuning grid: interpolation weights
    #[arg(long, env = "KNNMT_LAMBDAS", value_delimiter = ',',
          default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    pub lambdas: Vec<f64>,

    /// Tuning grid (and sweep) temperatures
    #[arg(long, env = "KNNMT_TEMPERATURES", value_delimiter = ',', default_value = "1,10,100")]
    pub temperatures: Vec<f64>,

    /// size-ablation: datastore fractions
    #[arg(long, env = "KNNMT_FRACTIONS", value_delimiter = ',', default_value = "0.1,0.5,1")]
    pub fractions: Vec<f64>,

    /// k-t-sweep: neighbor counts
    #[arg(long, env = "KNNMT_KS", value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128")]
    pub ks: Vec<usize>,

    /// k-t-sweep: fixed interpolation weight
    #[arg(long, env = "KNNMT_SWEEP_LAMBDA", default_value_t = 0.5)]
    pub sweep_lambda: f64,

    /// Beam size
    #[arg(long, env = "KNNMT_BEAM", default_value_t = 5)]
    pub beam: usize,

    #[command(flatten)]
    pub index: IndexArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Minimum datastore entries
    #[arg(long, env = "KNNMT_ENTRIES", default_value_t = 1_000_000)]
    pub entries: usize,

    /// Timed search queries
    #[arg(long, env = "KNNMT_QUERIES", default_value_t = 1000)]
    pub queries: usize,

    /// Coarse clusters
    #[arg(long, env = "KNNMT_CLUSTERS", default_value_t = 256)]
    pub clusters: usize,

    /// Bytes per product-quantized code
    #[arg(long, env = "KNNMT_PQ_BYTES", default_value_t = 16)]
    pub pq_bytes: usize,

    /// k-means iterations
    #[arg(long, env = "KNNMT_KMEANS_ITERS", default_value_t = 10)]
    pub kmeans_iters: usize,

    #[command(flatten)]
    pub knn: KnnArgs,

    /// Interpolation weight of the retrieval run
    #[arg(long, env = "KNNMT_LAMBDA", default_value_t = 0.5)]
    pub lambda: f64,

    /// Softmax temperature
    #[arg(long, env = "KNNMT_TEMPERATURE", default_value_t = 10.0)]
    pub temperature: f64,

    /// Sentences decoded with and without retrieval
    #[arg(long, env = "KNNMT_SENTENCES", default_value_t = 100)]
    pub sentences: usize,

    /// Beam size of the timed decodes
    #[arg(long, env = "KNNMT_BEAM", default_value_t = 1)]
    pub beam: usize,

    /// JSON report
    #[arg(long, env = "KNNMT_OUT", value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Synthetic corpus and index seed [default: random, printed]
    #[arg(long, env = "KNNMT_SEED")]
    pub seed: Option<u64>,
}
