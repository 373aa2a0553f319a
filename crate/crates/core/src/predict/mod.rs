//! Shape-type prediction with one-vs-rest linear SVMs, ablation baselines
//! and feature-importance aggregation.

mod experiment;
mod importance;
mod report;
mod sampling;
mod svm;

pub use experiment::{permute_labels, run_experiment, CategoryResult, ExperimentConfig, FeatureSet};
pub use importance::{feature_importance, Importance};
pub use report::{
    aggregate_report, read_results_csv, write_deltas_csv, write_importance_csv, write_results_csv, AccuracySummary,
    CategoryDelta, FiveNumber, Report, WeightSummary,
};
pub use sampling::{balance_classes, stratified_split, MIN_MINORITY_CLASS};
pub use svm::{train_linear_svm, LinearModel, SvmConfig};
