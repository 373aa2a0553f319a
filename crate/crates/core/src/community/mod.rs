//! Community detection on contour graphs and shape-type extraction.

mod louvain;
mod metrics;
mod separability;
mod shapes;
mod tune;

pub use louvain::{louvain, modularity, LOUVAIN_RESTARTS, modularity_with_resolution, Partition};
pub use metrics::adjusted_rand_index;
pub use separability::{evaluate_separability, stratified_folds, DecisionTree, DEFAULT_FOLDS};
pub use shapes::{
    prune_small, read_labels_csv, shape_types, write_labels_csv, PrunedPartition, ShapeType, ShapeTypeSet,
    DEFAULT_PRUNE_THRESHOLD,
};
pub use tune::{tune_and_partition, SweepRow, TuneConfig, TunedPartition, DEFAULT_RESOLUTIONS, MAX_SHAPE_TYPES};
