//! Two-phase greedy modularity optimization (Louvain): local node moves,
//! then aggregation of communities into super-nodes, repeated until no node
//! changes community.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::contour_net::ContourGraph;
use crate::scalar::Scalar;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    /// Community id per node, dense from 0 in order of first appearance.
    pub assignment: Vec<usize>,
    /// Standard (resolution 1) modularity of the assignment.
    pub modularity: f64,
}

impl Partition {
    pub fn community_count(&self) -> usize {
        self.assignment.iter().max().map_or(0, |m| m + 1)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.community_count()];
        for &c in &self.assignment {
            s[c] += 1;
        }
        s
    }
}

/// `Q = sum_c [ e_c / m - gamma (d_c / 2m)^2 ]`; zero for an edgeless graph.
pub fn modularity_with_resolution<T: Scalar>(g: &ContourGraph<T>, assignment: &[usize], resolution: f64) -> f64 {
    let m = g.edge_count() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let k = assignment.iter().max().map_or(0, |x| x + 1);
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for &(a, b) in g.edges() {
        let (ca, cb) = (assignment[a as usize], assignment[b as usize]);
        degree[ca] += 1.0;
        degree[cb] += 1.0;
        if ca == cb {
            internal[ca] += 1.0;
        }
    }
    internal
        .iter()
        .zip(&degree)
        .map(|(e, d)| e / m - resolution * (d / (2.0 * m)).powi(2))
        .sum()
}

pub fn modularity<T: Scalar>(g: &ContourGraph<T>, assignment: &[usize]) -> f64 {
    modularity_with_resolution(g, assignment, 1.0)
}

/// Weighted graph with self-loops, the working representation at each level.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    degree: Vec<f64>,
}

impl Level {
    fn from_graph<T: Scalar>(g: &ContourGraph<T>) -> Self {
        let n = g.n_nodes();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in g.edges() {
            adj[a as usize].push((b as usize, 1.0));
            adj[b as usize].push((a as usize, 1.0));
        }
        let degree = adj.iter().map(|l| l.len() as f64).collect();
        Level {
            adj,
            self_loops: vec![0.0; n],
            degree,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Greedy node moves from `comm` until a full sweep moves nothing.
    /// Returns the community of each node and whether anything moved.
    fn local_moves(&self, mut comm: Vec<usize>, resolution: f64, two_m: f64, rng: &mut seed::Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut total = vec![0.0; n];
        for (i, &c) in comm.iter().enumerate() {
            total[c] += self.degree[i];
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut weight_to = vec![0.0; n];
        let mut seen = vec![false; n];
        let mut touched = Vec::new();
        let mut any = false;
        loop {
            let mut moved = false;
            for &i in &order {
                let ci = comm[i];
                let ki = self.degree[i];
                for &(j, w) in &self.adj[i] {
                    let c = comm[j];
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c);
                    }
                    weight_to[c] += w;
                }
                total[ci] -= ki;
                let mut best = ci;
                let mut best_gain = weight_to[ci] - resolution * total[ci] * ki / two_m;
                for &c in &touched {
                    let gain = weight_to[c] - resolution * total[c] * ki / two_m;
                    if gain > best_gain + 1e-12 {
                        best = c;
                        best_gain = gain;
                    }
                }
                total[best] += ki;
                comm[i] = best;
                if best != ci {
                    moved = true;
                }
                for &c in &touched {
                    weight_to[c] = 0.0;
                    seen[c] = false;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
            any = true;
        }
        (dense_ids(&comm), any)
    }

    fn aggregate(&self, comm: &[usize]) -> Level {
        let k = comm.iter().max().map_or(0, |x| x + 1);
        let mut self_loops = vec![0.0; k];
        let mut degree = vec![0.0; k];
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..self.len() {
            let ci = comm[i];
            degree[ci] += self.degree[i];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                if j <= i {
                    continue;
                }
                let cj = comm[j];
                if ci == cj {
                    self_loops[ci] += w;
                } else {
                    pairs.push((ci.min(cj), ci.max(cj), w));
                }
            }
        }
        pairs.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut adj = vec![Vec::new(); k];
        let mut it = pairs.into_iter().peekable();
        while let Some((a, b, mut w)) = it.next() {
            while let Some(&(a2, b2, w2)) = it.peek() {
                if (a2, b2) != (a, b) {
                    break;
                }
                w += w2;
                it.next();
            }
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        Level {
            adj,
            self_loops,
            degree,
        }
    }
}

/// Relabels ids densely in order of first appearance.
fn dense_ids(ids: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    ids.iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect()
}

/// Independent Louvain runs per call; the best objective wins.
pub const LOUVAIN_RESTARTS: usize = 8;

/// Louvain community detection. Runs [`LOUVAIN_RESTARTS`] passes with node
/// visit orders shuffled from `seed` and keeps the one with the highest
/// modularity at `resolution` (earliest on ties).
pub fn louvain<T: Scalar>(g: &ContourGraph<T>, resolution: f64, seed: u64) -> Partition {
    let mut best: Option<(f64, Partition)> = None;
    for r in 0..LOUVAIN_RESTARTS {
        let p = louvain_once(g, resolution, seed::derive_seed(seed, &["restart", &r.to_string()]));
        let q = modularity_with_resolution(g, &p.assignment, resolution);
        if best.as_ref().is_none_or(|(bq, _)| q > *bq + 1e-12) {
            best = Some((q, p));
        }
    }
    best.expect("at least one restart").1
}

fn louvain_once<T: Scalar>(g: &ContourGraph<T>, resolution: f64, seed: u64) -> Partition {
    let n = g.n_nodes();
    if g.edge_count() == 0 {
        let assignment: Vec<usize> = (0..n).collect();
        return Partition {
            modularity: modularity(g, &assignment),
            assignment,
        };
    }
    let two_m = 2.0 * g.edge_count() as f64;
    let mut rng = seed::rng(seed);
    let base = Level::from_graph(g);
    let mut node_comm: Vec<usize> = (0..n).collect();
    let mut level = base.aggregate(&node_comm);
    loop {
        loop {
            let singletons = (0..level.len()).collect();
            let (comm, moved) = level.local_moves(singletons, resolution, two_m, &mut rng);
            if !moved {
                break;
            }
            for c in node_comm.iter_mut() {
                *c = comm[*c];
            }
            let next = level.aggregate(&comm);
            if next.len() == level.len() {
                break;
            }
            level = next;
        }
        // Single-node moves on the original graph, then aggregate again.
        let (refined, moved) = base.local_moves(node_comm.clone(), resolution, two_m, &mut rng);
        if !moved {
            break;
        }
        node_comm = refined;
        level = base.aggregate(&node_comm);
    }
    let assignment = dense_ids(&node_comm);
    Partition {
        modularity: modularity(g, &assignment),
        assignment,
    }
}
