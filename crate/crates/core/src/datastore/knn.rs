use crate::scalar::Scalar;

/// Distribution over the vocabulary induced by retrieved neighbors.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnDistribution<S> {
    pub probs: Vec<S>,
    /// No neighbors were retrieved; `probs` is all zeros.
    pub empty: bool,
}

/// Temperature softmax over negative distances, aggregated per value:
/// `p(y) ∝ Σ_j 1[y = v_j] · exp(−d_j / T)`.
///
/// Tokens that were not retrieved get exactly zero. Weights are shifted by
/// the smallest distance before exponentiating, which leaves the normalized
/// result unchanged.
pub fn knn_distribution<S: Scalar>(neighbors: &[(S, u32)], temperature: S, vocab_size: usize) -> KnnDistribution<S> {
    let mut probs = vec![S::zero(); vocab_size];
    let weights = neighbor_weights(neighbors, temperature);
    if weights.is_empty() {
        return KnnDistribution { probs, empty: true };
    }
    for (&(_, v), w) in neighbors.iter().zip(weights) {
        if let Some(p) = probs.get_mut(v as usize) {
            *p += w;
        }
    }
    KnnDistribution { probs, empty: false }
}

/// Normalized per-neighbor shares `exp(−d_j/T) / Σ_i exp(−d_i/T)`.
pub fn neighbor_weights<S: Scalar>(neighbors: &[(S, u32)], temperature: S) -> Vec<S> {
    if neighbors.is_empty() {
        return Vec::new();
    }
    let d_min = neighbors
        .iter()
        .map(|n| n.0)
        .fold(S::infinity(), |a, b| a.min(b));
    let raw: Vec<S> = neighbors
        .iter()
        .map(|&(d, _)| (-(d - d_min) / temperature).exp())
        .collect();
    let total: S = raw.iter().copied().sum();
    raw.into_iter().map(|w| w / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_neighbor_is_one_hot() {
        let d = knn_distribution(&[(0.0f64, 2)], 10.0, 4);
        assert_eq!(d.probs, [0.0, 0.0, 1.0, 0.0]);
        assert!(!d.empty);
    }

    #[test]
    fn equal_distances_count_occurrences() {
        for t in [0.5f64, 1.0, 100.0] {
            let d = knn_distribution(&[(0.0, 0), (0.0, 1), (0.0, 0)], t, 2);
            assert!((d.probs[0] - 2.0 / 3.0).abs() < 1e-12);
            assert!((d.probs[1] - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_computed_two_neighbors() {
        // exp(0) = 1, exp(-1.0986) ≈ 1/3 → 0.75 / 0.25
        let d = knn_distribution(&[(0.0f32, 0), (1.0986, 1)], 1.0, 2);
        assert!((d.probs[0] - 0.75).abs() < 1e-3);
        assert!((d.probs[1] - 0.25).abs() < 1e-3);
    }

    #[test]
    fn empty_set_is_flagged_zero() {
        let d = knn_distribution::<f64>(&[], 1.0, 3);
        assert!(d.empty);
        assert_eq!(d.probs, [0.0; 3]);
    }

    #[test]
    fn distance_scaling_equals_temperature_division() {
        let n = [(0.3f64, 0), (1.7, 1), (2.2, 0), (0.9, 2)];
        let c = 3.5;
        let scaled: Vec<(f64, u32)> = n.iter().map(|&(d, v)| (d * c, v)).collect();
        let a = knn_distribution(&n, 2.0, 3);
        let b = knn_distribution(&scaled, 2.0 * c, 3);
        for (x, y) in a.probs.iter().zip(&b.probs) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
