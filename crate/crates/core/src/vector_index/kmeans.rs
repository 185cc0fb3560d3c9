//! Lloyd's k-means with k-means++ seeding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::distance::{sq_l2, BlockedCentroids};
use super::IndexError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansParams {
    /// Iteration cap.
    pub iters: usize,
    /// Stop once the relative distortion improvement drops below this.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            iters: 20,
            tolerance: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeans<S> {
    pub dim: usize,
    /// Row-major `k × dim`.
    pub centroids: Vec<S>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances to the assigned centroid.
    pub distortion: f64,
    pub iterations: usize,
}

impl<S: Scalar> KMeans<S> {
    pub fn k(&self) -> usize {
        self.centroids.len() / self.dim
    }

    pub fn centroid(&self, i: usize) -> &[S] {
        &self.centroids[i * self.dim..(i + 1) * self.dim]
    }
}

/// Clusters the `dim`-dimensional rows of `data` into `k` groups.
///
/// Points equidistant to several centroids go to the lowest index. A
/// cluster that empties is re-seeded with the point of the largest cluster
/// that lies farthest from its centroid.
pub fn kmeans<S: Scalar>(
    data: &[S],
    dim: usize,
    k: usize,
    params: &KMeansParams,
) -> Result<KMeans<S>, IndexError> {
    if dim == 0 || data.len() % dim != 0 {
        return Err(IndexError::DimensionMismatch {
            expected: dim,
            found: data.len(),
        });
    }
    let n = data.len() / dim;
    if k == 0 {
        return Err(IndexError::InvalidConfig("k-means needs at least one cluster".into()));
    }
    if n < k {
        return Err(IndexError::TooFewPoints { points: n, clusters: k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut centroids = plus_plus_init(data, dim, k, &mut rng);
    let (mut assignments, mut dists) = assign(data, &centroids, dim);
    let mut distortion = total(&dists);
    let mut iterations = 0;
    while iterations < params.iters && distortion > 0.0 {
        iterations += 1;
        update(data, dim, k, &mut centroids, &mut assignments, &mut dists);
        let (a, d) = assign(data, &centroids, dim);
        assignments = a;
        dists = d;
        let next = total(&dists);
        let improvement = distortion - next;
        distortion = next;
        if improvement <= params.tolerance * (distortion + improvement) {
            break;
        }
    }
    Ok(KMeans {
        dim,
        centroids,
        assignments,
        distortion,
        iterations,
    })
}

fn total<S: Scalar>(d: &[S]) -> f64 {
    d.iter().map(|v| v.as_f64()).sum()
}

fn row<S>(data: &[S], dim: usize, i: usize) -> &[S] {
    &data[i * dim..(i + 1) * dim]
}

fn plus_plus_init<S: Scalar>(data: &[S], dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<S> {
    let n = data.len() / dim;
    let mut centroids = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(row(data, dim, first));
    let mut min_d: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| sq_l2(row(data, dim, i), row(data, dim, first)).as_f64())
        .collect();
    for _ in 1..k {
        let sum: f64 = min_d.iter().sum();
        let pick = if sum > 0.0 {
            let target = rng.random::<f64>() * sum;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &d) in min_d.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // Rounding can leave `acc` just short of `target`.
            chosen.unwrap_or_else(|| min_d.iter().rposition(|&d| d > 0.0).expect("sum > 0"))
        } else {
            rng.random_range(0..n)
        };
        let c = row(data, dim, pick).to_vec();
        min_d.par_iter_mut().enumerate().for_each(|(i, m)| {
            let d = sq_l2(row(data, dim, i), &c).as_f64();
            if d < *m {
                *m = d;
            }
        });
        centroids.extend_from_slice(&c);
    }
    centroids
}

fn assign<S: Scalar>(data: &[S], centroids: &[S], dim: usize) -> (Vec<usize>, Vec<S>) {
    let blocked = BlockedCentroids::new(centroids, dim);
    data.par_chunks_exact(dim).map(|p| blocked.nearest(p)).unzip()
}

fn update<S: Scalar>(
    data: &[S],
    dim: usize,
    k: usize,
    centroids: &mut [S],
    assignments: &mut [usize],
    dists: &mut [S],
) {
    let mut sums = vec![0f64; k * dim];
    let mut counts = vec![0usize; k];
    for (i, &c) in assignments.iter().enumerate() {
        counts[c] += 1;
        for (s, &v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(row(data, dim, i)) {
            *s += v.as_f64();
        }
    }
    for c in 0..k {
        if counts[c] == 0 {
            continue;
        }
        let inv = 1.0 / counts[c] as f64;
        for (dst, &s) in centroids[c * dim..(c + 1) * dim].iter_mut().zip(&sums[c * dim..]) {
            *dst = S::of(s * inv);
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let largest = (0..k)
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
            .expect("k > 0");
        if counts[largest] < 2 {
            continue;
        }
        let mut far = None;
        let mut far_d = S::neg_infinity();
        for (i, &a) in assignments.iter().enumerate() {
            if a == largest && dists[i] > far_d {
                far_d = dists[i];
                far = Some(i);
            }
        }
        let far = far.expect("largest cluster is non-empty");
        centroids[c * dim..(c + 1) * dim].copy_from_slice(row(data, dim, far));
        assignments[far] = c;
        dists[far] = S::zero();
        counts[largest] -= 1;
        counts[c] = 1;
    }
}
