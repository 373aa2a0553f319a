//! Synthetic corpora with planted contour-shape clusters.
//!
//! Each syllable approaches a linear pitch target `T(u) = intercept + slope·u`
//! with first-order exponential dynamics, starting from wherever the previous
//! syllable ended. Coupling rules shift the target of syllables that carry a
//! feature, so the set of active rules (a bitmask) is the planted cluster.

mod contour;
mod corpus;
mod spec;

pub use contour::{generate_contour, trajectory};
pub use corpus::{generate_corpus, GroundTruth, SyllableTruth, GROUND_TRUTH_HEADER};
pub use spec::{AnnotationSpec, CouplingFeature, CouplingRule, SpeakerSpec, SynthSpec, ToneTarget};
