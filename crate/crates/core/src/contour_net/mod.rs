//! Similarity networks over a category's contour vectors and threshold
//! selection against degree-preserving null models.

mod distance;
mod graph;
mod threshold;

pub use distance::{pairwise_distances, DistanceTable, EdgeSource, SparseDistances};
pub use graph::{
    clustering_coefficient, graph_density, local_clustering, randomize_degree_preserving, threshold_graph,
    ContourGraph,
};
pub use threshold::{
    default_thresholds, select_threshold, write_diagnostics_csv, ThresholdConfig, ThresholdDiagnostics,
    ThresholdSelection, BIGRAM_TRIGRAM_THRESHOLDS, UNIGRAM_THRESHOLDS,
};
