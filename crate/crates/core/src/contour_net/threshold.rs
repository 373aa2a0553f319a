use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::EdgeSource;
use super::graph::{clustering_coefficient, graph_density, randomize_degree_preserving, threshold_graph, ContourGraph};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::derive_seed;

pub const UNIGRAM_THRESHOLDS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];
pub const BIGRAM_TRIGRAM_THRESHOLDS: [f64; 8] = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5];

/// Candidate thresholds for n-gram order `n`.
pub fn default_thresholds(n: usize) -> Vec<f64> {
    if n == 1 {
        UNIGRAM_THRESHOLDS.to_vec()
    } else {
        BIGRAM_TRIGRAM_THRESHOLDS.to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub seed: u64,
    /// Randomized null models averaged per candidate.
    pub replicates: usize,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig { seed: 0, replicates: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ThresholdDiagnostics<T> {
    pub phi: T,
    pub edges: usize,
    pub cc_observed: f64,
    pub cc_random: f64,
    pub delta: f64,
    pub density: f64,
}

#[derive(Debug, Clone)]
pub struct ThresholdSelection<T> {
    pub threshold: T,
    pub graph: ContourGraph<T>,
    /// One row per candidate, in ascending threshold order.
    pub diagnostics: Vec<ThresholdDiagnostics<T>>,
}

/// Picks the candidate maximizing `CC(G') - CC(G_r)`, where `G_r` is `G'`
/// rewired with `|E|` degree-preserving swap attempts. Ties go to the smaller
/// threshold. Candidates yielding no edges are never selected.
///
/// Every candidate's null model uses the same seed stream, so candidates that
/// produce identical graphs produce identical scores.
pub fn select_threshold<T: Scalar, S: EdgeSource<T> + ?Sized>(
    source: &S,
    candidates: &[T],
    config: &ThresholdConfig,
) -> Result<ThresholdSelection<T>> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("empty threshold candidate set".into()));
    }
    let mut phis = candidates.to_vec();
    phis.sort_by(|a, b| a.partial_cmp(b).expect("finite thresholds"));
    phis.dedup();
    let replicates = config.replicates.max(1);

    let evaluated: Vec<(ThresholdDiagnostics<T>, ContourGraph<T>)> = phis
        .par_iter()
        .map(|&phi| {
            let g = threshold_graph(source, phi);
            let cc_observed = clustering_coefficient(&g);
            let cc_random = if g.edge_count() == 0 {
                cc_observed
            } else {
                (0..replicates)
                    .map(|r| {
                        let s = derive_seed(config.seed, &["null-model", &r.to_string()]);
                        clustering_coefficient(&randomize_degree_preserving(&g, g.edge_count(), s))
                    })
                    .sum::<f64>()
                    / replicates as f64
            };
            let d = ThresholdDiagnostics {
                phi,
                edges: g.edge_count(),
                cc_observed,
                cc_random,
                delta: cc_observed - cc_random,
                density: graph_density(&g),
            };
            (d, g)
        })
        .collect();

    let mut best: Option<usize> = None;
    for (i, (d, _)) in evaluated.iter().enumerate() {
        if d.edges == 0 {
            continue;
        }
        if best.is_none_or(|b| d.delta > evaluated[b].0.delta) {
            best = Some(i);
        }
    }
    let best = best.ok_or(Error::NoConnectiveThreshold)?;
    let mut diagnostics = Vec::with_capacity(evaluated.len());
    let mut graph = None;
    for (i, (d, g)) in evaluated.into_iter().enumerate() {
        if i == best {
            graph = Some(g);
        }
        diagnostics.push(d);
    }
    Ok(ThresholdSelection {
        threshold: phis[best],
        graph: graph.expect("selected graph retained"),
        diagnostics,
    })
}

pub fn write_diagnostics_csv<T: Scalar, W: Write>(mut w: W, diags: &[ThresholdDiagnostics<T>]) -> std::io::Result<()> {
    writeln!(w, "phi,edges,cc_observed,cc_random,delta")?;
    for d in diags {
        writeln!(w, "{},{},{},{},{}", d.phi, d.edges, d.cc_observed, d.cc_random, d.delta)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour_net::{pairwise_distances, DistanceTable};

    fn two_clusters() -> Vec<Vec<f64>> {
        // within-cluster spread ~0.1, clusters 3 apart
        (0..40)
            .map(|i| {
                let base = if i < 20 { 0.0 } else { 3.0 };
                vec![base + (i % 5) as f64 * 0.02, (i % 7) as f64 * 0.015]
            })
            .collect()
    }

    #[test]
    fn planted_gap_is_found() {
        let t = pairwise_distances(&two_clusters());
        let sel = select_threshold(&t, &[0.05, 0.5, 1.0, 4.0], &ThresholdConfig { seed: 1, replicates: 1 }).unwrap();
        assert!(sel.threshold > 0.2 && sel.threshold < 3.0, "{}", sel.threshold);
        let top = sel.diagnostics.iter().map(|d| d.delta).fold(f64::MIN, f64::max);
        let chosen = sel.diagnostics.iter().find(|d| d.phi == sel.threshold).unwrap();
        assert_eq!(chosen.delta, top);
    }

    #[test]
    fn single_candidate_returned() {
        let t = pairwise_distances(&two_clusters());
        let sel = select_threshold(&t, &[0.6], &ThresholdConfig::default()).unwrap();
        assert_eq!(sel.threshold, 0.6);
        assert_eq!(sel.diagnostics.len(), 1);
    }

    #[test]
    fn tie_goes_to_smaller_threshold() {
        // 0.5 and 1.0 yield the same graph, hence the same score
        let t = pairwise_distances(&two_clusters());
        let sel = select_threshold(&t, &[1.0, 0.5], &ThresholdConfig { seed: 9, replicates: 2 }).unwrap();
        assert_eq!(sel.diagnostics[0].delta, sel.diagnostics[1].delta);
        assert_eq!(sel.threshold, 0.5);
    }

    #[test]
    fn all_empty_is_an_error() {
        let t = DistanceTable::from_condensed(3, vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            select_threshold(&t, &[0.1, 0.2], &ThresholdConfig::default()),
            Err(Error::NoConnectiveThreshold)
        ));
    }

    #[test]
    fn csv_layout() {
        let d = vec![ThresholdDiagnostics {
            phi: 0.5,
            edges: 3,
            cc_observed: 1.0,
            cc_random: 0.25,
            delta: 0.75,
            density: 0.5,
        }];
        let mut buf = Vec::new();
        write_diagnostics_csv(&mut buf, &d).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "phi,edges,cc_observed,cc_random,delta\n0.5,3,1,0.25,0.75\n");
    }
}
