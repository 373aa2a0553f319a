use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::phonology::{PhonemeTable, PhonologicalFlags};
use super::tagset::{collapse_tagset, default_pos_coarse_map, CoarseMap, TagCollapse, TagKind};
use crate::error::{Error, Result};
use crate::ingest::Corpus;
use crate::preprocess::NgramInstance;
use crate::scalar::Scalar;
use crate::tone::ToneContext;

const PHONOLOGY_NAMES: [&str; 7] = ["is_nasal", "is_dipthong", "is_round", "is_front", "is_back", "is_high", "is_low"];

pub fn raw_feature_count(n: usize) -> usize {
    10 * n + 7
}

/// Raw feature names in canonical order; per-syllable features carry a 1-based suffix.
pub fn raw_feature_names(n: usize) -> Vec<String> {
    let per = |stem: &'static str| (1..=n).map(move |i| format!("{stem}_{i}"));
    let mut names: Vec<String> = Vec::with_capacity(raw_feature_count(n));
    names.extend(per("pos_tag"));
    names.extend(per("dep_func"));
    names.extend(per("tok_bound"));
    names.push("is_entity".into());
    names.push("is_singleton".into());
    for stem in PHONOLOGY_NAMES {
        names.extend(per(stem));
    }
    for s in ["sent_position", "start_pitch", "end_pitch", "prev_tone", "next_tone"] {
        names.push(s.into());
    }
    names
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureDomain {
    Syntactic,
    Morphological,
    Semantic,
    Phonological,
    Other,
}

impl FeatureDomain {
    pub const ALL: [FeatureDomain; 5] = [
        FeatureDomain::Syntactic,
        FeatureDomain::Morphological,
        FeatureDomain::Semantic,
        FeatureDomain::Phonological,
        FeatureDomain::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureDomain::Syntactic => "syntactic",
            FeatureDomain::Morphological => "morphological",
            FeatureDomain::Semantic => "semantic",
            FeatureDomain::Phonological => "phonological",
            FeatureDomain::Other => "other",
        }
    }
}

impl fmt::Display for FeatureDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Linguistic domain of a raw feature name.
pub fn domain_of(feature: &str) -> FeatureDomain {
    let stem = feature.trim_end_matches(|c: char| c.is_ascii_digit()).trim_end_matches('_');
    match stem {
        "pos_tag" | "dep_func" => FeatureDomain::Syntactic,
        "tok_bound" => FeatureDomain::Morphological,
        "is_entity" | "is_singleton" => FeatureDomain::Semantic,
        s if PHONOLOGY_NAMES.contains(&s) => FeatureDomain::Phonological,
        _ => FeatureDomain::Other,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemaConfig {
    pub min_count: usize,
    pub pos_coarse: CoarseMap,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        SchemaConfig {
            min_count: 5,
            pos_coarse: default_pos_coarse_map(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub n: usize,
    pub pos: TagCollapse,
    pub dep: TagCollapse,
    pub phoneme_table_hash: String,
    pub feature_names: Vec<String>,
}

impl FeatureSchema {
    /// Collapses the POS and dependency tag sets using token counts over the whole corpus.
    pub fn from_corpus(n: usize, corpus: &Corpus, config: &SchemaConfig, phonemes: &PhonemeTable) -> Self {
        let mut pos: BTreeMap<String, usize> = BTreeMap::new();
        let mut dep: BTreeMap<String, usize> = BTreeMap::new();
        for tok in corpus.annotations.values().flatten() {
            *pos.entry(tok.pos_tag.clone()).or_default() += 1;
            *dep.entry(tok.dep_function.clone()).or_default() += 1;
        }
        FeatureSchema {
            n,
            pos: collapse_tagset(&pos, config.min_count, TagKind::Pos(&config.pos_coarse)),
            dep: collapse_tagset(&dep, config.min_count, TagKind::Dependency),
            phoneme_table_hash: phonemes.hash().to_owned(),
            feature_names: raw_feature_names(n),
        }
    }

    pub fn raw_count(&self) -> usize {
        self.feature_names.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawValue<T> {
    Categorical(String),
    Boolean(bool),
    Numeric(T),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureVector<T> {
    pub instance_id: u64,
    pub pos_tags: Vec<String>,
    pub dep_funcs: Vec<String>,
    pub tok_bound: Vec<bool>,
    pub is_entity: bool,
    pub is_singleton: bool,
    pub phonology: Vec<PhonologicalFlags>,
    pub sent_position: T,
    pub start_pitch: T,
    pub end_pitch: T,
    pub prev_tone: ToneContext,
    pub next_tone: ToneContext,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn order(&self) -> usize {
        self.pos_tags.len()
    }

    /// Values in the order of [`raw_feature_names`].
    pub fn raw_values(&self) -> Vec<RawValue<T>> {
        let n = self.order();
        let mut out = Vec::with_capacity(raw_feature_count(n));
        out.extend(self.pos_tags.iter().cloned().map(RawValue::Categorical));
        out.extend(self.dep_funcs.iter().cloned().map(RawValue::Categorical));
        out.extend(self.tok_bound.iter().copied().map(RawValue::Boolean));
        out.push(RawValue::Boolean(self.is_entity));
        out.push(RawValue::Boolean(self.is_singleton));
        for k in 0..7 {
            out.extend(self.phonology.iter().map(|p| RawValue::Boolean(p.as_array()[k])));
        }
        out.push(RawValue::Numeric(self.sent_position));
        out.push(RawValue::Numeric(self.start_pitch));
        out.push(RawValue::Numeric(self.end_pitch));
        out.push(RawValue::Categorical(self.prev_tone.symbol().to_owned()));
        out.push(RawValue::Categorical(self.next_tone.symbol().to_owned()));
        out
    }
}

pub fn extract_features<T: Scalar>(
    instance: &NgramInstance<T>,
    corpus: &Corpus,
    schema: &FeatureSchema,
    phonemes: &PhonemeTable,
) -> Result<FeatureVector<T>> {
    let n = instance.category.order();
    if n != schema.n {
        return Err(Error::InvalidInput(format!(
            "instance {} has order {n}, schema expects {}",
            instance.instance_id, schema.n
        )));
    }
    let utt = &instance.source.utterance_id;
    let first = instance.source.first_syllable;
    let window = corpus
        .syllables
        .get(utt)
        .and_then(|s| s.get(first..first + n))
        .ok_or_else(|| Error::InvalidInput(format!("instance {} points outside utterance {utt}", instance.instance_id)))?;

    let mut fv = FeatureVector {
        instance_id: instance.instance_id,
        pos_tags: Vec::with_capacity(n),
        dep_funcs: Vec::with_capacity(n),
        tok_bound: Vec::with_capacity(n),
        is_entity: false,
        is_singleton: false,
        phonology: Vec::with_capacity(n),
        sent_position: instance.sentence_position,
        start_pitch: instance.start_pitch,
        end_pitch: instance.end_pitch,
        prev_tone: instance.prev_tone,
        next_tone: instance.next_tone,
    };
    for (i, syl) in window.iter().enumerate() {
        let tok = corpus.token_for(utt, syl.index).ok_or_else(|| Error::UncoveredSyllable {
            utterance: utt.clone(),
            index: syl.index,
        })?;
        fv.pos_tags.push(schema.pos.map(&tok.pos_tag));
        fv.dep_funcs.push(schema.dep.map(&tok.dep_function));
        fv.tok_bound.push(i > 0 && syl.word_initial);
        fv.is_entity |= tok.in_named_entity;
        fv.is_singleton |= tok.is_singleton;
        fv.phonology.push(phonemes.syllable_flags(&syl.phonemes)?);
    }
    Ok(fv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_counts_by_order() {
        assert_eq!(raw_feature_names(1).len(), 17);
        assert_eq!(raw_feature_names(2).len(), 27);
        assert_eq!(raw_feature_names(3).len(), 37);
    }

    #[test]
    fn domains_follow_feature_families() {
        assert_eq!(domain_of("pos_tag_2"), FeatureDomain::Syntactic);
        assert_eq!(domain_of("tok_bound_1"), FeatureDomain::Morphological);
        assert_eq!(domain_of("is_singleton"), FeatureDomain::Semantic);
        assert_eq!(domain_of("is_dipthong_3"), FeatureDomain::Phonological);
        assert_eq!(domain_of("prev_tone"), FeatureDomain::Other);
        assert_eq!(domain_of("start_pitch"), FeatureDomain::Other);
    }
}
