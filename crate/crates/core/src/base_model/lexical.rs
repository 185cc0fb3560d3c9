use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::embed::FeatureEmbeddings;
use super::{KeyVector, ModelError, TranslationContext, TranslationModel};
use crate::binio::{fingerprint, FormatError, Reader, Writer};
use crate::corpus::{ParallelCorpus, BOS, EOS, PAD};

const MAGIC: &str = "lnm-v1";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Weight μ of the lexical component; `1 − μ` goes to the bigram LM.
    pub mix: f64,
    /// Add-α smoothing constant for both tables.
    pub alpha: f64,
    /// Number of trailing target tokens that feed the key.
    pub window: usize,
    pub seed: u64,
    pub dim: usize,
    pub source_weight: f64,
    pub target_weight: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            mix: 0.5,
            alpha: 0.1,
            window: 2,
            seed: 0,
            dim: 64,
            source_weight: 1.0,
            target_weight: 2.0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(0.0..=1.0).contains(&self.mix) {
            return Err(ModelError::Config(format!("mix {} outside [0, 1]", self.mix)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(ModelError::Config(format!("alpha {} must be positive", self.alpha)));
        }
        if self.dim == 0 {
            return Err(ModelError::Config("key dimension must be at least 1".into()));
        }
        if !(self.source_weight.is_finite() && self.target_weight.is_finite()) {
            return Err(ModelError::Config("feature weights must be finite".into()));
        }
        Ok(())
    }
}

/// Lexical translation table mixed with a target bigram LM.
///
/// `p_mt = μ · mean_j P(· | s_j) + (1 − μ) · P(· | t_{i−1})`. Keys are the
/// unit-normalized sum of seeded embeddings of the source unigrams and the
/// last `window` target tokens (tagged with their distance).
#[derive(Debug, Clone)]
pub struct LexicalNgramModel {
    config: ModelConfig,
    source_vocab: usize,
    target_vocab: usize,
    source_fingerprint: u64,
    target_fingerprint: u64,
    /// Row-major `source_vocab × target_vocab`.
    lexical: Vec<f32>,
    /// Row-major `target_vocab × target_vocab`, row = previous token.
    bigram: Vec<f32>,
    lexical_norm: Vec<f64>,
    bigram_norm: Vec<f64>,
    embeddings: FeatureEmbeddings,
    fingerprint: u64,
}

fn is_word(t: u32) -> bool {
    t != PAD && t != BOS && t != EOS
}

/// Source tokens that condition the lexical component: the words, or the
/// whole sequence if it has none.
fn lexical_context(source: &[u32]) -> Vec<u32> {
    let words: Vec<u32> = source.iter().copied().filter(|&t| is_word(t)).collect();
    if words.is_empty() {
        source.to_vec()
    } else {
        words
    }
}

/// Distinct tokens in order of first occurrence.
fn distinct(tokens: &[u32]) -> Vec<u32> {
    let mut seen = std::collections::HashSet::new();
    tokens.iter().copied().filter(|t| seen.insert(*t)).collect()
}

impl LexicalNgramModel {
    pub fn fit(config: ModelConfig, corpus: &ParallelCorpus) -> Result<Self, ModelError> {
        config.validate()?;
        if corpus.is_empty() {
            return Err(ModelError::EmptyCorpus);
        }
        let vs = corpus.source_vocab.len();
        let vt = corpus.target_vocab.len();
        let mut lex = vec![0f64; vs * vt];
        let mut big = vec![0f64; vt * vt];
        for pair in &corpus.pairs {
            for &s in &pair.source {
                check(s, vs, "source")?;
            }
            for &t in &pair.target {
                check(t, vt, "target")?;
            }
            // Uniform alignment over word tokens: each target word credits
            // every source word. Sentence boundaries are left to the bigram.
            let source = lexical_context(&pair.source);
            let w = 1.0 / source.len() as f64;
            for &t in pair.target.iter().filter(|&&t| is_word(t)) {
                for &s in &source {
                    lex[s as usize * vt + t as usize] += w;
                }
            }
            for p in pair.target.windows(2) {
                big[p[0] as usize * vt + p[1] as usize] += 1.0;
            }
        }
        let lexical = smooth(&lex, vt, config.alpha);
        let bigram = smooth(&big, vt, config.alpha);
        Ok(Self::assemble(
            config,
            vs,
            vt,
            corpus.source_vocab.fingerprint(),
            corpus.target_vocab.fingerprint(),
            lexical,
            bigram,
        ))
    }

    fn assemble(
        config: ModelConfig,
        source_vocab: usize,
        target_vocab: usize,
        source_fingerprint: u64,
        target_fingerprint: u64,
        lexical: Vec<f32>,
        bigram: Vec<f32>,
    ) -> Self {
        let row_sums = |t: &[f32]| -> Vec<f64> {
            t.chunks(target_vocab)
                .map(|r| r.iter().map(|&v| v as f64).sum())
                .collect()
        };
        let embeddings = FeatureEmbeddings::generate(
            config.seed,
            config.dim,
            config.window,
            source_vocab,
            target_vocab,
        );
        let mut model = Self {
            lexical_norm: row_sums(&lexical),
            bigram_norm: row_sums(&bigram),
            config,
            source_vocab,
            target_vocab,
            source_fingerprint,
            target_fingerprint,
            lexical,
            bigram,
            embeddings,
            fingerprint: 0,
        };
        let mut bytes = Vec::new();
        model.write_body(&mut Writer::new(&mut bytes)).expect("in-memory write");
        model.fingerprint = fingerprint(&[&bytes]);
        model
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn source_vocab_size(&self) -> usize {
        self.source_vocab
    }

    /// Smoothed `P(target | source)`.
    pub fn lexical_prob(&self, source: u32, target: u32) -> f64 {
        let s = source as usize;
        self.lexical[s * self.target_vocab + target as usize] as f64 / self.lexical_norm[s]
    }

    /// Smoothed `P(next | prev)`.
    pub fn bigram_prob(&self, prev: u32, next: u32) -> f64 {
        let p = prev as usize;
        self.bigram[p * self.target_vocab + next as usize] as f64 / self.bigram_norm[p]
    }

    pub fn embeddings(&self) -> &FeatureEmbeddings {
        &self.embeddings
    }

    fn validate_ctx(&self, ctx: &TranslationContext<'_>) -> Result<(), ModelError> {
        if ctx.source.is_empty() {
            return Err(ModelError::EmptySource);
        }
        if ctx.prefix.first() != Some(&BOS) {
            return Err(ModelError::MissingBos);
        }
        for &s in ctx.source {
            check(s, self.source_vocab, "source")?;
        }
        for &t in ctx.prefix {
            check(t, self.target_vocab, "target")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let f = fs::File::create(path).map_err(FormatError::from)?;
        let mut w = Writer::new(BufWriter::new(f));
        self.write_to(&mut w).map_err(FormatError::from)?;
        w.into_inner().flush().map_err(FormatError::from)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut Writer::new(&mut out)).expect("in-memory write");
        out
    }

    fn write_to<W: Write>(&self, w: &mut Writer<W>) -> std::io::Result<()> {
        w.header(MAGIC)?;
        self.write_body(w)
    }

    fn write_body<W: Write>(&self, w: &mut Writer<W>) -> std::io::Result<()> {
        let c = &self.config;
        w.f64(c.mix)?;
        w.f64(c.alpha)?;
        w.u32(c.window as u32)?;
        w.u64(c.seed)?;
        w.u32(c.dim as u32)?;
        w.f64(c.source_weight)?;
        w.f64(c.target_weight)?;
        w.u64(self.source_fingerprint)?;
        w.u64(self.target_fingerprint)?;
        w.u32(self.source_vocab as u32)?;
        w.u32(self.target_vocab as u32)?;
        w.f32s(&self.lexical)?;
        w.f32s(&self.bigram)
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let f = fs::File::open(path).map_err(FormatError::from)?;
        Self::read_from(BufReader::new(f))
    }

    pub fn read_from<R: Read>(inner: R) -> Result<Self, ModelError> {
        let mut r = Reader::new(inner);
        r.expect_header(MAGIC)?;
        let config = ModelConfig {
            mix: r.f64("config")?,
            alpha: r.f64("config")?,
            window: r.u32("config")? as usize,
            seed: r.u64("config")?,
            dim: r.u32("config")? as usize,
            source_weight: r.f64("config")?,
            target_weight: r.f64("config")?,
        };
        config.validate()?;
        let sfp = r.u64("fingerprints")?;
        let tfp = r.u64("fingerprints")?;
        let vs = r.u32("vocab sizes")? as usize;
        let vt = r.u32("vocab sizes")? as usize;
        let lexical = r.f32s(vs * vt, "lexical table")?;
        let bigram = r.f32s(vt * vt, "bigram table")?;
        r.expect_end()?;
        Ok(Self::assemble(config, vs, vt, sfp, tfp, lexical, bigram))
    }
}

fn check(id: u32, size: usize, side: &'static str) -> Result<(), ModelError> {
    if (id as usize) < size {
        Ok(())
    } else {
        Err(ModelError::TokenOutOfRange { side, id, size })
    }
}

fn smooth(counts: &[f64], width: usize, alpha: f64) -> Vec<f32> {
    let mut out = Vec::with_capacity(counts.len());
    for row in counts.chunks(width) {
        let total: f64 = row.iter().sum::<f64>() + alpha * width as f64;
        out.extend(row.iter().map(|&c| ((c + alpha) / total) as f32));
    }
    out
}

impl TranslationModel for LexicalNgramModel {
    fn target_vocab_size(&self) -> usize {
        self.target_vocab
    }

    fn key_dim(&self) -> usize {
        self.config.dim
    }

    fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn target_vocab_fingerprint(&self) -> u64 {
        self.target_fingerprint
    }

    fn source_vocab_fingerprint(&self) -> u64 {
        self.source_fingerprint
    }

    fn distribution(&self, ctx: TranslationContext<'_>) -> Result<Vec<f64>, ModelError> {
        self.validate_ctx(&ctx)?;
        let vt = self.target_vocab;
        let mu = self.config.mix;
        let mut p = vec![0f64; vt];
        if mu > 0.0 {
            let source = lexical_context(ctx.source);
            let n = source.len() as f64;
            for &s in &source {
                let s = s as usize;
                let row = &self.lexical[s * vt..(s + 1) * vt];
                let scale = mu / (n * self.lexical_norm[s]);
                for (acc, &v) in p.iter_mut().zip(row) {
                    *acc += v as f64 * scale;
                }
            }
        }
        if mu < 1.0 {
            let prev = *ctx.prefix.last().expect("validated non-empty") as usize;
            let row = &self.bigram[prev * vt..(prev + 1) * vt];
            let scale = (1.0 - mu) / self.bigram_norm[prev];
            for (acc, &v) in p.iter_mut().zip(row) {
                *acc += v as f64 * scale;
            }
        }
        Ok(p)
    }

    fn key(&self, ctx: TranslationContext<'_>) -> Result<KeyVector, ModelError> {
        self.validate_ctx(&ctx)?;
        let mut acc = vec![0f64; self.config.dim];
        let ws = self.config.source_weight;
        for s in distinct(ctx.source) {
            for (a, &e) in acc.iter_mut().zip(self.embeddings.source(s)) {
                *a += ws * e;
            }
        }
        let wt = self.config.target_weight;
        let n = ctx.prefix.len();
        for j in 1..=self.config.window.min(n) {
            let tok = ctx.prefix[n - j];
            for (a, &e) in acc.iter_mut().zip(self.embeddings.target(j, tok)) {
                *a += wt * e;
            }
        }
        Ok(KeyVector::normalized(&acc))
    }

    fn key_window(&self) -> Option<usize> {
        Some(self.config.window)
    }
}
