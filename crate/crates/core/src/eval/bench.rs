use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::synth::{Language, SynthConfig};
use super::EvalError;
use crate::base_model::{LexicalNgramModel, ModelConfig, TranslationContext, TranslationModel};
use crate::corpus::{build_vocabs, encode, tokenize_pairs, Provenance, TokenizerConfig};
use crate::datastore::{self, IndexKind, IndexSettings, KnnParams};
use crate::decoder::{DecodeOptions, Decoder};

/// Retrieval and decoding benchmark over a synthetic store.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// Minimum datastore size; whole sentences are added until it is reached.
    pub entries: usize,
    pub queries: usize,
    pub clusters: usize,
    pub sub_quantizers: usize,
    pub kmeans_iters: usize,
    pub knn: KnnParams,
    pub decode_sentences: usize,
    pub beam: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            entries: 1_000_000,
            queries: 1000,
            clusters: 256,
            sub_quantizers: 16,
            kmeans_iters: 10,
            knn: KnnParams::default(),
            decode_sentences: 100,
            beam: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub mean_us: f64,
    pub p50_us: f64,
    pub p90_us: f64,
    pub p99_us: f64,
    pub max_us: f64,
}

impl LatencyStats {
    /// Nearest-rank percentiles of `samples` (microseconds).
    pub fn of(samples: &[f64]) -> Self {
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let pick = |q: f64| {
            if s.is_empty() {
                return 0.0;
            }
            let rank = (q * s.len() as f64).ceil() as usize;
            s[rank.clamp(1, s.len()) - 1]
        };
        Self {
            mean_us: if s.is_empty() { 0.0 } else { s.iter().sum::<f64>() / s.len() as f64 },
            p50_us: pick(0.5),
            p90_us: pick(0.9),
            p99_us: pick(0.99),
            max_us: s.last().copied().unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeTiming {
    pub lambda: f64,
    pub sentences: usize,
    pub steps: usize,
    pub total_ms: f64,
    pub per_step_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub entries: usize,
    pub sentences: usize,
    pub dim: usize,
    pub clusters: usize,
    pub sub_quantizers: usize,
    pub k: usize,
    pub nprobe: usize,
    pub fit_secs: f64,
    pub build_secs: f64,
    pub index_bytes: usize,
    pub queries: usize,
    pub query: LatencyStats,
    pub qps: f64,
    pub base: DecodeTiming,
    pub knn: DecodeTiming,
    /// `knn.per_step_us / base.per_step_us`.
    pub overhead: f64,
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "datastore: {} entries from {} sentences, dim {}, C {}, S {}\n",
            self.entries, self.sentences, self.dim, self.clusters, self.sub_quantizers
        ));
        out.push_str(&format!(
            "build: fit {:.2} s, datastore {:.2} s, codes {} bytes\n",
            self.fit_secs, self.build_secs, self.index_bytes
        ));
        out.push_str(&format!(
            "search (k={}, nprobe={}, {} queries): p50 {:.1} us, p90 {:.1} us, p99 {:.1} us, max {:.1} us, mean {:.1} us, {:.0} qps\n",
            self.k,
            self.nprobe,
            self.queries,
            self.query.p50_us,
            self.query.p90_us,
            self.query.p99_us,
            self.query.max_us,
            self.query.mean_us,
            self.qps
        ));
        for t in [&self.base, &self.knn] {
            out.push_str(&format!(
                "decode lambda={}: {} sentences, {} steps, {:.1} ms, {:.1} us/step\n",
                t.lambda, t.sentences, t.steps, t.total_ms, t.per_step_us
            ));
        }
        out.push_str(&format!("retrieval overhead per step: {:.1}x\n", self.overhead));
        out
    }
}

fn micros(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e6
}

/// Builds a store of at least `config.entries` entries from the synthetic
/// language and times search and decoding. Timings vary run to run; the
/// store itself is seeded.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport, EvalError> {
    config.knn.validate()?;
    if config.entries == 0 || config.queries == 0 || config.decode_sentences == 0 {
        return Err(EvalError::Config("entries, queries and decode sentences must be positive".into()));
    }
    let lang = Language::generate(
        SynthConfig {
            seed: config.seed,
            ..SynthConfig::default()
        },
        &[],
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut raw = Vec::new();
    let mut count = 0;
    while count < config.entries {
        let pair = lang.sample(&mut rng, None);
        count += pair.1.split_whitespace().count() + 1;
        raw.push(pair);
    }
    let held_out: Vec<(String, String)> = (0..config.queries.max(config.decode_sentences))
        .map(|_| lang.sample(&mut rng, None))
        .collect();

    let tok = TokenizerConfig::default();
    let train_text = tokenize_pairs(&raw, &tok);
    let test_text = tokenize_pairs(&held_out, &tok);
    let (sv, tv) = build_vocabs([&train_text, &test_text], tok.shared_vocab);
    let prov = |part: &str| Provenance {
        path: format!("synthetic:{}/{part}", config.seed),
        tokenizer_fingerprint: tok.fingerprint(),
    };
    let train = encode(&train_text, &sv, &tv, prov("bench"))?;
    let test = encode(&test_text, &sv, &tv, prov("held-out"))?;
    drop(raw);

    let start = Instant::now();
    let model = LexicalNgramModel::fit(
        ModelConfig {
            seed: config.seed,
            ..ModelConfig::default()
        },
        &train,
    )?;
    let fit_secs = start.elapsed().as_secs_f64();
    let settings = IndexSettings {
        kind: IndexKind::IvfPq {
            clusters: Some(config.clusters),
            sub_quantizers: config.sub_quantizers,
            identity: false,
        },
        kmeans_iters: config.kmeans_iters,
        seed: config.seed,
        provenance: false,
    };
    let start = Instant::now();
    let ds = datastore::build(&model, &train, &settings)?;
    let build_secs = start.elapsed().as_secs_f64();

    // Queries: keys of held-out contexts at random target positions.
    let queries: Vec<_> = test
        .pairs
        .iter()
        .cycle()
        .take(config.queries)
        .map(|p| {
            let i = rng.random_range(1..p.target.len());
            model.key(TranslationContext::new(&p.source, &p.target[..i]))
        })
        .collect::<Result<_, _>>()?;
    let mut latencies = Vec::with_capacity(queries.len());
    let all = Instant::now();
    for q in &queries {
        let t = Instant::now();
        let r = ds.retrieve(q, &config.knn)?;
        latencies.push(micros(t));
        std::hint::black_box(r);
    }
    let search_secs = all.elapsed().as_secs_f64();

    let sources: Vec<Vec<u32>> = test
        .pairs
        .iter()
        .take(config.decode_sentences)
        .map(|p| p.source.clone())
        .collect();
    let options = DecodeOptions::with_beam(config.beam);
    let time_decode = |lambda: f64| -> Result<DecodeTiming, EvalError> {
        let params = KnnParams { lambda, ..config.knn };
        let decoder = Decoder::new(&model, Some(&ds), params)?;
        let start = Instant::now();
        let mut steps = 0;
        for s in &sources {
            let t = decoder.translate(s, &options)?;
            steps += t.tokens.len() + usize::from(t.finished);
        }
        let total = start.elapsed().as_secs_f64();
        Ok(DecodeTiming {
            lambda,
            sentences: sources.len(),
            steps,
            total_ms: total * 1e3,
            per_step_us: total * 1e6 / steps.max(1) as f64,
        })
    };
    let base = time_decode(0.0)?;
    let knn = time_decode(if config.knn.lambda > 0.0 { config.knn.lambda } else { 0.5 })?;
    let (_, sub_quantizers, clusters) = ds.index_shape();
    Ok(BenchReport {
        entries: ds.len(),
        sentences: train.len(),
        dim: ds.dim(),
        clusters,
        sub_quantizers,
        k: config.knn.k,
        nprobe: config.knn.nprobe,
        fit_secs,
        build_secs,
        index_bytes: ds.len() * sub_quantizers,
        queries: queries.len(),
        query: LatencyStats::of(&latencies),
        qps: queries.len() as f64 / search_secs,
        overhead: knn.per_step_us / base.per_step_us.max(f64::MIN_POSITIVE),
        base,
        knn,
    })
}
