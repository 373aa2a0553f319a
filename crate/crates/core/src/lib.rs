//! Tone n-gram contour shape mining.
//!
//! Pitch contours of tone n-grams are normalized per speaker, resampled to a
//! fixed length and linked into a similarity network per tone category. A
//! distance threshold is chosen against degree-preserving null models, the
//! network is partitioned with Louvain modularity optimization, and the
//! surviving communities' centroids become the category's shape types.
//! Linear SVMs then predict the shape type from linguistic features.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the crate root
//! re-exports `f64` aliases for the common types.

pub mod community;
pub mod contour_net;
pub mod error;
pub mod features;
pub mod ingest;
pub mod predict;
pub mod preprocess;
pub mod scalar;
pub mod seed;
pub mod synth;
pub mod tone;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tone::{Tone, ToneCategory, ToneContext};

pub type NgramInstance = preprocess::NgramInstance<f64>;
pub type NgramDataset = preprocess::NgramDataset<f64>;
pub type DistanceTable = contour_net::DistanceTable<f64>;
pub type ContourGraph = contour_net::ContourGraph<f64>;
pub type FeatureVector = features::FeatureVector<f64>;
pub type FeatureMatrix = features::FeatureMatrix<f64>;
pub type ShapeTypeSet = community::ShapeTypeSet<f64>;
pub type LinearModel = predict::LinearModel<f64>;
