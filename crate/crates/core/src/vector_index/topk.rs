use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::scalar::Scalar;

/// One retrieved entry with its (possibly approximate) squared-L2 distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<S> {
    pub id: u64,
    pub distance: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<S> {
    /// Ascending by distance, ties by ascending id.
    pub neighbors: Vec<Neighbor<S>>,
    /// Set when the index was untrained or held no entries.
    pub index_empty: bool,
}

impl<S> SearchResult<S> {
    pub fn empty() -> Self {
        Self {
            neighbors: Vec::new(),
            index_empty: true,
        }
    }

    pub fn ids(&self) -> Vec<u64> {
        self.neighbors.iter().map(|n| n.id).collect()
    }
}

struct Entry<S>(S, u64);

impl<S: Scalar> PartialEq for Entry<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for Entry<S> {}
impl<S: Scalar> PartialOrd for Entry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for Entry<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .partial_cmp(&other.0)
            .unwrap_or(Ordering::Equal)
            .then(self.1.cmp(&other.1))
    }
}

/// Keeps the `k` smallest `(distance, id)` pairs seen.
pub struct TopK<S> {
    k: usize,
    heap: BinaryHeap<Entry<S>>,
}

impl<S: Scalar> TopK<S> {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    /// Current admission threshold; anything strictly worse is rejected.
    #[inline]
    pub fn worst(&self) -> Option<S> {
        if self.heap.len() < self.k {
            None
        } else {
            self.heap.peek().map(|e| e.0)
        }
    }

    #[inline]
    pub fn push(&mut self, id: u64, distance: S) {
        if self.k == 0 {
            return;
        }
        let e = Entry(distance, id);
        if self.heap.len() < self.k {
            self.heap.push(e);
        } else if let Some(top) = self.heap.peek() {
            if e < *top {
                self.heap.pop();
                self.heap.push(e);
            }
        }
    }

    pub fn into_sorted(self) -> Vec<Neighbor<S>> {
        self.heap
            .into_sorted_vec()
            .into_iter()
            .map(|Entry(distance, id)| Neighbor { id, distance })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_smallest_with_id_tie_break() {
        let mut t = TopK::new(3);
        for (id, d) in [(5, 1.0f32), (1, 3.0), (2, 1.0), (9, 0.5), (0, 3.0), (4, 1.0)] {
            t.push(id, d);
        }
        let ids: Vec<u64> = t.into_sorted().iter().map(|n| n.id).collect();
        assert_eq!(ids, [9, 2, 4]);
    }
}
