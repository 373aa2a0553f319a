use rayon::prelude::*;

use crate::scalar::{squared_distance, Scalar};

/// Condensed upper-triangular Euclidean distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DistanceTable<T> {
    /// Builds a table from condensed row-major upper-triangular entries.
    pub fn from_condensed(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * n.saturating_sub(1) / 2, "condensed size mismatch");
        DistanceTable { n, data }
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn condensed(&self) -> &[T] {
        &self.data
    }

    #[inline]
    fn row_offset(&self, i: usize) -> usize {
        // entries before row i: sum_{r<i} (n-1-r)
        i * (2 * self.n - i - 1) / 2
    }

    /// Distance between distinct nodes `i` and `j`.
    pub fn get(&self, i: usize, j: usize) -> T {
        assert!(i != j && i < self.n && j < self.n);
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.data[self.row_offset(a) + (b - a - 1)]
    }

    pub fn max(&self) -> T {
        self.data.iter().copied().fold(T::zero(), T::max)
    }
}

/// Full pairwise Euclidean distances, computed row-parallel.
pub fn pairwise_distances<T: Scalar, V: AsRef<[T]> + Sync>(vectors: &[V]) -> DistanceTable<T> {
    let n = vectors.len();
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = vectors[i].as_ref();
            vectors[i + 1..].iter().map(|b| squared_distance(a, b.as_ref()).sqrt()).collect()
        })
        .collect();
    DistanceTable {
        n,
        data: rows.concat(),
    }
}

/// Anything that can enumerate the node pairs within a distance threshold.
pub trait EdgeSource<T>: Sync {
    fn n_nodes(&self) -> usize;
    /// Pairs `(i, j)` with `i < j` and `distance(i, j) <= phi`, sorted.
    fn edges_within(&self, phi: T) -> Vec<(u32, u32)>;
}

impl<T: Scalar> EdgeSource<T> for DistanceTable<T> {
    fn n_nodes(&self) -> usize {
        self.n
    }

    fn edges_within(&self, phi: T) -> Vec<(u32, u32)> {
        let rows: Vec<Vec<(u32, u32)>> = (0..self.n)
            .into_par_iter()
            .map(|i| {
                let off = self.row_offset(i);
                let len = self.n - i - 1;
                self.data[off..off + len]
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| d <= phi)
                    .map(|(k, _)| (i as u32, (i + 1 + k) as u32))
                    .collect()
            })
            .collect();
        rows.concat()
    }
}

/// Distances no larger than a cap, computed in row blocks without ever
/// holding the full table. Suitable for categories whose dense table would
/// not fit in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDistances<T> {
    n: usize,
    cap: T,
    entries: Vec<(u32, u32, T)>,
}

impl<T: Scalar> SparseDistances<T> {
    const BLOCK: usize = 256;

    pub fn from_vectors<V: AsRef<[T]> + Sync>(vectors: &[V], cap: T) -> Self {
        let n = vectors.len();
        let cap2 = cap * cap;
        let blocks: Vec<Vec<(u32, u32, T)>> = (0..n.div_ceil(Self::BLOCK))
            .into_par_iter()
            .map(|b| {
                let mut out = Vec::new();
                for i in b * Self::BLOCK..((b + 1) * Self::BLOCK).min(n) {
                    let a = vectors[i].as_ref();
                    for (j, v) in vectors.iter().enumerate().skip(i + 1) {
                        let d2 = squared_distance(a, v.as_ref());
                        if d2 <= cap2 {
                            let d = d2.sqrt();
                            if d <= cap {
                                out.push((i as u32, j as u32, d));
                            }
                        }
                    }
                }
                out
            })
            .collect();
        SparseDistances {
            n,
            cap,
            entries: blocks.concat(),
        }
    }

    pub fn cap(&self) -> T {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<T: Scalar> EdgeSource<T> for SparseDistances<T> {
    fn n_nodes(&self) -> usize {
        self.n
    }

    fn edges_within(&self, phi: T) -> Vec<(u32, u32)> {
        assert!(phi <= self.cap, "threshold above the sparse table cap");
        self.entries.iter().filter(|e| e.2 <= phi).map(|e| (e.0, e.1)).collect()
    }
}
