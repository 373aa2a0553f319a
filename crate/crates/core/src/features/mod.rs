//! Linguistic feature extraction and encoding for shape-type prediction.
//!
//! Each n-gram gets `10 n + 7` raw features in five domains: POS tag and
//! dependency function per syllable (syntactic), word-boundary flags
//! (morphological), entity and singleton membership (semantic), seven
//! segmental flags per syllable (phonological), and sentence position,
//! start/end pitch and neighbouring tones (other).

mod encode;
mod extract;
mod phonology;
mod tagset;

pub use encode::{write_matrix_csv, ColumnKind, FeatureEncoder, FeatureMatrix};
pub use extract::{
    domain_of, extract_features, raw_feature_count, raw_feature_names, FeatureDomain, FeatureSchema, FeatureVector,
    RawValue, SchemaConfig,
};
pub use phonology::{PhonemeAttributes, PhonemeTable, PhonologicalFlags, DEFAULT_PHONEME_TABLE};
pub use tagset::{collapse_tagset, default_pos_coarse_map, stem, CoarseMap, TagCollapse, TagKind, OTHER};
