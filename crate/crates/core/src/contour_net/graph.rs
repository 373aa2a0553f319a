use std::collections::HashSet;

use rand::Rng as _;
use rayon::prelude::*;

use super::distance::EdgeSource;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;

/// Unweighted similarity graph: an edge joins two instances whose distance
/// is at most `threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourGraph<T> {
    n_nodes: usize,
    edges: Vec<(u32, u32)>,
    threshold: T,
}

impl<T: Scalar> ContourGraph<T> {
    /// Builds a graph from arbitrary-order pairs. Duplicates are merged;
    /// self-loops and out-of-range endpoints are rejected.
    pub fn from_edges(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>, threshold: T) -> Result<Self> {
        let mut out = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidInput(format!("self-loop on node {a}")));
            }
            if a >= n_nodes || b >= n_nodes {
                return Err(Error::InvalidInput(format!("edge ({a}, {b}) out of range for {n_nodes} nodes")));
            }
            out.push((a.min(b) as u32, a.max(b) as u32));
        }
        out.sort_unstable();
        out.dedup();
        Ok(ContourGraph {
            n_nodes,
            edges: out,
            threshold,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_nodes];
        for &(a, b) in &self.edges {
            d[a as usize] += 1;
            d[b as usize] += 1;
        }
        d
    }

    /// Sorted neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n_nodes];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        adj
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b) as u32, a.max(b) as u32);
        self.edges.binary_search(&key).is_ok()
    }
}

/// Keeps every pair whose distance is at most `phi`.
pub fn threshold_graph<T: Scalar, S: EdgeSource<T> + ?Sized>(source: &S, phi: T) -> ContourGraph<T> {
    ContourGraph {
        n_nodes: source.n_nodes(),
        edges: source.edges_within(phi),
        threshold: phi,
    }
}

/// `2m / (n (n - 1))`; the saturation measure some authors call the
/// clustering coefficient. Unchanged by degree-preserving rewiring.
pub fn graph_density<T: Scalar>(g: &ContourGraph<T>) -> f64 {
    let n = g.n_nodes as f64;
    if g.n_nodes < 2 {
        return 0.0;
    }
    2.0 * g.edge_count() as f64 / (n * (n - 1.0))
}

const BITSET_MAX_NODES: usize = 20_000;
const PARALLEL_MIN_NODES: usize = 512;

/// Per-node clustering: triangles through the node over `deg (deg - 1) / 2`,
/// zero for degree below two.
pub fn local_clustering<T: Scalar>(g: &ContourGraph<T>) -> Vec<f64> {
    let adj = g.adjacency();
    let n = g.n_nodes;
    let ratio = |tri: u64, deg: usize| {
        if deg < 2 {
            0.0
        } else {
            2.0 * tri as f64 / (deg as f64 * (deg as f64 - 1.0))
        }
    };
    if n <= BITSET_MAX_NODES {
        let words = n.div_ceil(64).max(1);
        let mut bits = vec![0u64; n * words];
        for &(a, b) in &g.edges {
            let (a, b) = (a as usize, b as usize);
            bits[a * words + b / 64] |= 1 << (b % 64);
            bits[b * words + a / 64] |= 1 << (a % 64);
        }
        let node = |u: usize| {
            let row_u = &bits[u * words..(u + 1) * words];
            let twice: u64 = adj[u]
                .iter()
                .map(|&v| {
                    let row_v = &bits[v as usize * words..(v as usize + 1) * words];
                    row_u.iter().zip(row_v).map(|(x, y)| (x & y).count_ones() as u64).sum::<u64>()
                })
                .sum();
            ratio(twice / 2, adj[u].len())
        };
        if n >= PARALLEL_MIN_NODES {
            (0..n).into_par_iter().map(node).collect()
        } else {
            (0..n).map(node).collect()
        }
    } else {
        (0..n)
            .into_par_iter()
            .map(|u| {
                let twice: u64 = adj[u].iter().map(|&v| sorted_intersection(&adj[u], &adj[v as usize])).sum();
                ratio(twice / 2, adj[u].len())
            })
            .collect()
    }
}

fn sorted_intersection(a: &[u32], b: &[u32]) -> u64 {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Average local clustering coefficient over all nodes, isolates included.
pub fn clustering_coefficient<T: Scalar>(g: &ContourGraph<T>) -> f64 {
    if g.n_nodes == 0 {
        return 0.0;
    }
    local_clustering(g).iter().sum::<f64>() / g.n_nodes as f64
}

#[inline]
fn key(a: u32, b: u32) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    ((lo as u64) << 32) | hi as u64
}

/// Attempts `swaps` double-edge swaps: edges `(a, b)` and `(c, d)` become
/// `(a, d)` and `(c, b)` unless that would create a self-loop or a duplicate
/// edge, in which case the attempt is skipped. Degrees are preserved exactly.
pub fn randomize_degree_preserving<T: Scalar>(g: &ContourGraph<T>, swaps: usize, seed: u64) -> ContourGraph<T> {
    let m = g.edges.len();
    if m < 2 {
        return g.clone();
    }
    let mut rng = seed::rng(seed);
    let mut edges = g.edges.clone();
    let mut present: HashSet<u64> = edges.iter().map(|&(a, b)| key(a, b)).collect();
    for _ in 0..swaps {
        let i = rng.random_range(0..m);
        let j = rng.random_range(0..m);
        if i == j {
            continue;
        }
        let (a, b) = edges[i];
        let (mut c, mut d) = edges[j];
        if rng.random::<bool>() {
            std::mem::swap(&mut c, &mut d);
        }
        if a == d || c == b {
            continue;
        }
        let (k1, k2) = (key(a, d), key(c, b));
        if k1 == k2 || present.contains(&k1) || present.contains(&k2) {
            continue;
        }
        present.remove(&key(a, b));
        present.remove(&key(c, d));
        present.insert(k1);
        present.insert(k2);
        edges[i] = (a.min(d), a.max(d));
        edges[j] = (c.min(b), c.max(b));
    }
    edges.sort_unstable();
    ContourGraph {
        n_nodes: g.n_nodes,
        edges,
        threshold: g.threshold,
    }
}
