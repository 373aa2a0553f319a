use serde::{Deserialize, Serialize};

use super::louvain::{louvain, Partition};
use crate::contour_net::ContourGraph;
use crate::scalar::Scalar;
use crate::seed::derive_seed;

pub const DEFAULT_RESOLUTIONS: [f64; 5] = [0.5, 0.75, 1.0, 1.5, 2.0];
/// Tuned partitions keep fewer than this many shape types.
pub const MAX_SHAPE_TYPES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub resolutions: Vec<f64>,
    pub prune_threshold: usize,
    pub seed: u64,
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig {
            resolutions: DEFAULT_RESOLUTIONS.to_vec(),
            prune_threshold: super::shapes::DEFAULT_PRUNE_THRESHOLD,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub resolution: f64,
    pub modularity: f64,
    pub communities: usize,
    /// Communities of at least the prune threshold.
    pub surviving: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedPartition {
    pub partition: Partition,
    pub resolution: f64,
    pub surviving: usize,
    /// True when no resolution met the shape-type limit.
    pub fallback: bool,
    pub sweep: Vec<SweepRow>,
}

/// Runs Louvain at each grid resolution and keeps the highest-modularity
/// partition with between 1 and 9 communities surviving pruning. If none
/// qualifies, falls back to the partition with the fewest surviving
/// communities (ties: higher modularity).
pub fn tune_and_partition<T: Scalar>(g: &ContourGraph<T>, config: &TuneConfig) -> TunedPartition {
    let runs: Vec<(f64, Partition)> = config
        .resolutions
        .iter()
        .map(|&r| (r, louvain(g, r, derive_seed(config.seed, &["louvain", &r.to_string()]))))
        .collect();
    let sweep: Vec<SweepRow> = runs
        .iter()
        .map(|(r, p)| SweepRow {
            resolution: *r,
            modularity: p.modularity,
            communities: p.community_count(),
            surviving: p.sizes().iter().filter(|&&s| s >= config.prune_threshold).count(),
        })
        .collect();

    let qualifies = |s: &SweepRow| s.surviving >= 1 && s.surviving < MAX_SHAPE_TYPES;
    let mut pick: Option<usize> = None;
    for (i, s) in sweep.iter().enumerate() {
        if qualifies(s) && pick.is_none_or(|p| s.modularity > sweep[p].modularity) {
            pick = Some(i);
        }
    }
    let fallback = pick.is_none();
    let pick = pick.unwrap_or_else(|| {
        let mut best = 0;
        for (i, s) in sweep.iter().enumerate() {
            let b = &sweep[best];
            let key = (s.surviving == 0, s.surviving);
            let best_key = (b.surviving == 0, b.surviving);
            if key < best_key || (key == best_key && s.modularity > b.modularity) {
                best = i;
            }
        }
        best
    });
    if fallback {
        log::warn!(
            "no resolution kept fewer than {MAX_SHAPE_TYPES} shape types; using resolution {}",
            sweep[pick].resolution
        );
    }
    let (resolution, partition) = runs.into_iter().nth(pick).expect("non-empty resolution grid");
    TunedPartition {
        partition,
        resolution,
        surviving: sweep[pick].surviving,
        fallback,
        sweep,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cliques(sizes: &[usize], bridges: bool) -> ContourGraph<f64> {
        let mut e = Vec::new();
        let mut base = 0;
        let mut starts = Vec::new();
        for &s in sizes {
            starts.push(base);
            for i in 0..s {
                for j in i + 1..s {
                    e.push((base + i, base + j));
                }
            }
            base += s;
        }
        if bridges {
            for w in starts.windows(2) {
                e.push((w[0], w[1]));
            }
        }
        ContourGraph::from_edges(base, e, 1.0).unwrap()
    }

    #[test]
    fn planted_four_clusters() {
        let t = tune_and_partition(&cliques(&[15, 15, 15, 15], true), &TuneConfig::default());
        assert!(!t.fallback);
        assert_eq!(t.surviving, 4);
    }

    #[test]
    fn single_clique_is_one_community_everywhere() {
        let g = cliques(&[20], false);
        let t = tune_and_partition(&g, &TuneConfig::default());
        // above resolution 1 a clique splits (gamma > n/(n-1)), but the split has
        // lower standard modularity than the single community
        assert!(t.sweep.iter().filter(|r| r.resolution <= 1.0).all(|r| r.communities == 1));
        assert_eq!(t.partition.community_count(), 1);
        assert_eq!(t.partition.modularity, 0.0);
    }

    #[test]
    fn too_many_communities_triggers_fallback() {
        // twelve disconnected cliques of size 10 survive at every resolution
        let g = cliques(&[10; 12], false);
        let t = tune_and_partition(&g, &TuneConfig::default());
        assert!(t.fallback);
        assert_eq!(t.surviving, 12);
    }
}
