use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

pub const SOURCE_UNIGRAM: u8 = 0;
pub const TARGET_WINDOW: u8 = 1;

/// Pseudo-random embedding of one sparse feature. The vector depends only
/// on `(seed, kind, position, token)`, never on generation order.
pub fn feature_vector(seed: u64, kind: u8, position: u32, token: u32, dim: usize) -> Vec<f64> {
    let mut h = Sha256::new();
    h.update(b"knnmt-feature");
    h.update(seed.to_le_bytes());
    h.update([kind]);
    h.update(position.to_le_bytes());
    h.update(token.to_le_bytes());
    let digest = h.finalize();
    let mut rng_seed = [0u8; 32];
    rng_seed.copy_from_slice(&digest);
    let mut rng = ChaCha8Rng::from_seed(rng_seed);
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Embedding tables for source unigrams and windowed target tokens.
#[derive(Debug, Clone)]
pub struct FeatureEmbeddings {
    dim: usize,
    window: usize,
    target_vocab: usize,
    source: Vec<f64>,
    /// `window` blocks of `target_vocab × dim`; block `j-1` is distance `j`.
    target: Vec<f64>,
}

impl FeatureEmbeddings {
    pub fn generate(seed: u64, dim: usize, window: usize, source_vocab: usize, target_vocab: usize) -> Self {
        let mut source = Vec::with_capacity(source_vocab * dim);
        for tok in 0..source_vocab as u32 {
            source.extend(feature_vector(seed, SOURCE_UNIGRAM, 0, tok, dim));
        }
        let mut target = Vec::with_capacity(window * target_vocab * dim);
        for j in 1..=window as u32 {
            for tok in 0..target_vocab as u32 {
                target.extend(feature_vector(seed, TARGET_WINDOW, j, tok, dim));
            }
        }
        Self {
            dim,
            window,
            target_vocab,
            source,
            target,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn source(&self, token: u32) -> &[f64] {
        let i = token as usize * self.dim;
        &self.source[i..i + self.dim]
    }

    /// Embedding of `token` seen `distance` positions back (1 = last token).
    pub fn target(&self, distance: usize, token: u32) -> &[f64] {
        debug_assert!((1..=self.window).contains(&distance));
        let i = ((distance - 1) * self.target_vocab + token as usize) * self.dim;
        &self.target[i..i + self.dim]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn features_are_seeded_and_distinct() {
        let a = feature_vector(7, SOURCE_UNIGRAM, 0, 3, 8);
        assert_eq!(a, feature_vector(7, SOURCE_UNIGRAM, 0, 3, 8));
        assert_ne!(a, feature_vector(8, SOURCE_UNIGRAM, 0, 3, 8));
        assert_ne!(a, feature_vector(7, TARGET_WINDOW, 0, 3, 8));
        assert_ne!(a, feature_vector(7, SOURCE_UNIGRAM, 0, 4, 8));
    }

    #[test]
    fn tables_match_direct_generation() {
        let e = FeatureEmbeddings::generate(11, 4, 2, 5, 6);
        assert_eq!(e.source(4), feature_vector(11, SOURCE_UNIGRAM, 0, 4, 4).as_slice());
        assert_eq!(e.target(2, 5), feature_vector(11, TARGET_WINDOW, 2, 5, 4).as_slice());
    }
}
