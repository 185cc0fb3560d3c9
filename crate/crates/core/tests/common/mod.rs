#![allow(dead_code)]

use knnmt::base_model::{KeyVector, LexicalNgramModel, ModelConfig, ModelError, TranslationContext, TranslationModel};
use knnmt::binio::fingerprint;
use knnmt::corpus::{EOS, NUM_RESERVED};
use knnmt::corpus::{build_vocabs, encode, tokenize_pairs, ParallelCorpus, Provenance, TokenizerConfig};
use knnmt::eval::{Language, SynthConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn corpus<S: AsRef<str> + Sync>(pairs: &[(S, S)]) -> ParallelCorpus {
    let config = TokenizerConfig::default();
    let text = tokenize_pairs(pairs, &config);
    let (sv, tv) = build_vocabs([&text], false);
    encode(
        &text,
        &sv,
        &tv,
        Provenance {
            path: "memory".into(),
            tokenizer_fingerprint: config.fingerprint(),
        },
    )
    .unwrap()
}

/// Word-for-word dictionary language: source word `s{c}_{i}` always
/// translates to `t{c}_{i}`, same order. Position `c` of a sentence draws
/// from word class `c`, so word order is recoverable from the previous
/// target word.
pub fn dictionary_pairs(n: usize, words: usize, slots: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let ids: Vec<(usize, usize)> = (0..slots).map(|c| (c, rng.random_range(0..words))).collect();
            let src: Vec<String> = ids.iter().map(|(c, i)| format!("s{c}_{i}")).collect();
            let tgt: Vec<String> = ids.iter().map(|(c, i)| format!("t{c}_{i}")).collect();
            (src.join(" "), tgt.join(" "))
        })
        .collect()
}

pub fn synthetic_pairs(n: usize, seed: u64) -> Vec<(String, String)> {
    let lang = Language::generate(
        SynthConfig {
            seed,
            ..SynthConfig::default()
        },
        &[],
    );
    lang.corpus(n, seed ^ 0x5eed, None)
}

pub fn fit(corpus: &ParallelCorpus, seed: u64) -> LexicalNgramModel {
    LexicalNgramModel::fit(
        ModelConfig {
            seed,
            ..ModelConfig::default()
        },
        corpus,
    )
    .unwrap()
}

pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f32> {
    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| (x / n) as f32).collect()
}

pub fn sq_dist(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (x as f64 - y as f64).powi(2)).sum()
}

/// `n` unit keys scattered around `centers` random unit directions with
/// per-coordinate gaussian noise of scale `spread`.
pub fn clustered_keys(n: usize, dim: usize, centers: usize, spread: f64, seed: u64) -> Vec<f32> {
    use rand_distr::{Distribution, Normal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<Vec<f32>> = (0..centers).map(|_| random_unit(&mut rng, dim)).collect();
    let noise = Normal::new(0.0, spread).unwrap();
    let mut out = Vec::with_capacity(n * dim);
    for _ in 0..n {
        let m = &means[rng.random_range(0..centers)];
        let v: Vec<f64> = m.iter().map(|&x| x as f64 + noise.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.extend(v.iter().map(|x| (x / norm) as f32));
    }
    out
}

/// `n` unit keys from a mixture of `centers` clusters, each spread along
/// its own `rank` random directions (scale `spread`) plus isotropic noise of
/// scale `noise`. Low intrinsic dimension, like context representations.
pub fn subspace_keys(n: usize, dim: usize, centers: usize, rank: usize, spread: f64, noise: f64, seed: u64) -> Vec<f32> {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<Vec<f32>> = (0..centers).map(|_| random_unit(&mut rng, dim)).collect();
    let bases: Vec<Vec<Vec<f32>>> = (0..centers)
        .map(|_| (0..rank).map(|_| random_unit(&mut rng, dim)).collect())
        .collect();
    let mut out = Vec::with_capacity(n * dim);
    for _ in 0..n {
        let c = rng.random_range(0..centers);
        let mut v: Vec<f64> = means[c].iter().map(|&x| x as f64).collect();
        for b in &bases[c] {
            let a: f64 = StandardNormal.sample(&mut rng);
            for (x, &y) in v.iter_mut().zip(b) {
                *x += a * spread * y as f64;
            }
        }
        for x in v.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *x += e * noise;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.extend(v.iter().map(|x| (x / norm) as f32));
    }
    out
}

/// Exact top-`k` ids by full sort, ties to the lower id.
pub fn brute_force(keys: &[f32], dim: usize, query: &[f32], k: usize) -> Vec<(u64, f64)> {
    let mut all: Vec<(u64, f64)> = keys
        .chunks_exact(dim)
        .enumerate()
        .map(|(i, v)| (i as u64, sq_dist(query, v)))
        .collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// Toy model over a three-token output vocabulary {EOS, a, b} (ids 2, 4, 5).
/// Each (source, prefix) gets its own seeded random distribution, so the
/// best sequence can only be found by search.
pub struct ToyModel {
    pub seed: u64,
}

pub const TOY_TOKENS: [u32; 3] = [EOS, NUM_RESERVED as u32, NUM_RESERVED as u32 + 1];

impl ToyModel {
    fn context_rng(&self, ctx: TranslationContext<'_>) -> ChaCha8Rng {
        let words: Vec<u8> = ctx
            .source
            .iter()
            .chain([&u32::MAX])
            .chain(ctx.prefix)
            .flat_map(|t| t.to_le_bytes())
            .collect();
        ChaCha8Rng::seed_from_u64(fingerprint(&[&self.seed.to_le_bytes(), &words]))
    }
}

impl TranslationModel for ToyModel {
    fn target_vocab_size(&self) -> usize {
        NUM_RESERVED + 2
    }

    fn key_dim(&self) -> usize {
        4
    }

    fn fingerprint(&self) -> u64 {
        self.seed
    }

    fn target_vocab_fingerprint(&self) -> u64 {
        0
    }

    fn source_vocab_fingerprint(&self) -> u64 {
        0
    }

    fn distribution(&self, ctx: TranslationContext<'_>) -> Result<Vec<f64>, ModelError> {
        let mut rng = self.context_rng(ctx);
        let w: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..1.0)).collect();
        let z: f64 = w.iter().sum();
        let mut p = vec![0.0; self.target_vocab_size()];
        for (t, w) in TOY_TOKENS.iter().zip(w) {
            p[*t as usize] = w / z;
        }
        Ok(p)
    }

    fn key(&self, ctx: TranslationContext<'_>) -> Result<KeyVector, ModelError> {
        let mut rng = self.context_rng(ctx);
        Ok(KeyVector::from_raw(random_unit(&mut rng, 4)))
    }
}
