use crate::scalar::Scalar;

const LANES: usize = 8;

/// Squared Euclidean distance. Accumulates in eight interleaved lanes so the
/// loop vectorizes; the summation order is fixed, so results are
/// reproducible.
#[inline]
pub fn sq_l2<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [S::zero(); LANES];
    let (ca, cb) = (a.chunks_exact(LANES), b.chunks_exact(LANES));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..LANES {
            let d = x[i] - y[i];
            acc[i] += d * d;
        }
    }
    let mut tail = S::zero();
    for (&x, &y) in ra.iter().zip(rb) {
        let d = x - y;
        tail += d * d;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// Inner product with the same lane layout as [`sq_l2`].
#[inline]
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [S::zero(); LANES];
    let (ca, cb) = (a.chunks_exact(LANES), b.chunks_exact(LANES));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..LANES {
            acc[i] += x[i] * y[i];
        }
    }
    let mut tail = S::zero();
    for (&x, &y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// Index and distance of the closest row of `centroids`; ties go to the
/// lower index.
#[inline]
pub fn nearest<S: Scalar>(point: &[S], centroids: &[S], dim: usize) -> (usize, S) {
    if dim == 4 {
        return nearest4(point, centroids);
    }
    let mut best = (0, S::infinity());
    for (i, c) in centroids.chunks_exact(dim).enumerate() {
        let d = sq_l2(point, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// [`nearest`] for the common 4-dimensional PQ subspace.
#[inline]
fn nearest4<S: Scalar>(p: &[S], centroids: &[S]) -> (usize, S) {
    let (p0, p1, p2, p3) = (p[0], p[1], p[2], p[3]);
    let mut best = (0, S::infinity());
    for (i, c) in centroids.chunks_exact(4).enumerate() {
        let (d0, d1, d2, d3) = (p0 - c[0], p1 - c[1], p2 - c[2], p3 - c[3]);
        let d = (d0 * d0 + d1 * d1) + (d2 * d2 + d3 * d3);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
/// Centroids transposed into blocks of [`LANES`] so that one pass computes
/// eight distances at once. Padding centroids sit at infinity.
pub struct BlockedCentroids<S> {
    dim: usize,
    k: usize,
    /// `blocks × dim × LANES`
    data: Vec<S>,
}

impl<S: Scalar> BlockedCentroids<S> {
    pub fn new(centroids: &[S], dim: usize) -> Self {
        let k = centroids.len() / dim;
        let blocks = k.div_ceil(LANES);
        let mut data = vec![S::infinity(); blocks * dim * LANES];
        for (i, c) in centroids.chunks_exact(dim).enumerate() {
            let (b, l) = (i / LANES, i % LANES);
            for (j, &v) in c.iter().enumerate() {
                data[(b * dim + j) * LANES + l] = v;
            }
        }
        Self { dim, k, data }
    }

    /// Same contract as [`nearest`]; per-centroid sums run over dimensions
    /// in order.
    pub fn nearest(&self, point: &[S]) -> (usize, S) {
        let mut best = (0, S::infinity());
        for (b, block) in self.data.chunks_exact(self.dim * LANES).enumerate() {
            let mut acc = [S::zero(); LANES];
            for (&p, col) in point.iter().zip(block.chunks_exact(LANES)) {
                let col: &[S; LANES] = col.try_into().expect("block column");
                for l in 0..LANES {
                    let d = p - col[l];
                    acc[l] += d * d;
                }
            }
            let min = |a: S, b: S| if b < a { b } else { a };
            let m = min(
                min(min(acc[0], acc[4]), min(acc[1], acc[5])),
                min(min(acc[2], acc[6]), min(acc[3], acc[7])),
            );
            if m < best.1 {
                let l = acc.iter().position(|&d| d == m).expect("minimum is present");
                best = (b * LANES + l, m);
            }
        }
        debug_assert!(best.0 < self.k || best.1.is_infinite());
        best
    }
}
