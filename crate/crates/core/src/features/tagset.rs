use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Reserved symbol for rare and unknown tags.
pub const OTHER: &str = "OTHER";

/// Part of a dependency label before any `:` subtype (`advmod:loc` → `advmod`).
pub fn stem(tag: &str) -> &str {
    tag.split_once(':').map_or(tag, |(s, _)| s)
}

/// Fine-to-coarse POS table. Coarse labels map to themselves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoarseMap(pub BTreeMap<String, String>);

impl CoarseMap {
    pub fn lookup(&self, tag: &str) -> String {
        if let Some(c) = self.0.get(tag) {
            return c.clone();
        }
        if tag == OTHER || self.0.values().any(|c| c == tag) {
            return tag.to_owned();
        }
        OTHER.to_owned()
    }
}

/// Penn Chinese Treebank's 33 POS tags folded into NOUN, VERB, MOD, FUNC and OTHER.
pub fn default_pos_coarse_map() -> CoarseMap {
    let groups: [(&str, &[&str]); 5] = [
        ("NOUN", &["NN", "NR", "NT", "PN"]),
        ("VERB", &["VA", "VC", "VE", "VV"]),
        ("MOD", &["AD", "JJ", "CD", "OD", "DT", "M"]),
        (
            "FUNC",
            &["AS", "BA", "CC", "CS", "DEC", "DEG", "DER", "DEV", "ETC", "LB", "LC", "MSP", "P", "SB", "SP"],
        ),
        ("OTHER", &["FW", "IJ", "ON", "PU"]),
    ];
    CoarseMap(
        groups
            .iter()
            .flat_map(|(c, tags)| tags.iter().map(move |t| (t.to_string(), c.to_string())))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy)]
pub enum TagKind<'a> {
    /// Subtypes folded into their stem before counting.
    Dependency,
    /// Rare tags become OTHER, the rest go through the coarse table.
    Pos(&'a CoarseMap),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagCollapse {
    pub vocabulary: BTreeSet<String>,
    pub mapping: BTreeMap<String, String>,
    #[serde(default)]
    pub coarse: Option<CoarseMap>,
}

impl TagCollapse {
    /// Collapsed label for `raw`, including tags never seen when the vocabulary was built.
    pub fn map(&self, raw: &str) -> String {
        if let Some(m) = self.mapping.get(raw) {
            return m.clone();
        }
        let candidate = match &self.coarse {
            Some(c) => c.lookup(raw),
            None => stem(raw).to_owned(),
        };
        if self.vocabulary.contains(&candidate) {
            candidate
        } else {
            OTHER.to_owned()
        }
    }

    /// Levels for one-hot encoding: the vocabulary plus OTHER, sorted.
    pub fn levels(&self) -> Vec<String> {
        let mut v: BTreeSet<String> = self.vocabulary.clone();
        v.insert(OTHER.to_owned());
        v.into_iter().collect()
    }
}

/// Collapses a tag distribution: tags seen fewer than `min_count` times
/// become OTHER. Dependency subtypes are first merged into their stem; POS
/// tags are additionally mapped through the coarse table.
pub fn collapse_tagset(counts: &BTreeMap<String, usize>, min_count: usize, kind: TagKind<'_>) -> TagCollapse {
    let min_count = min_count.max(1);
    let mut mapping = BTreeMap::new();
    match kind {
        TagKind::Dependency => {
            let mut stems: BTreeMap<&str, usize> = BTreeMap::new();
            for (tag, &c) in counts {
                *stems.entry(stem(tag)).or_default() += c;
            }
            for tag in counts.keys() {
                let s = stem(tag);
                let label = if stems[s] >= min_count { s } else { OTHER };
                mapping.insert(tag.clone(), label.to_owned());
            }
        }
        TagKind::Pos(coarse) => {
            for (tag, &c) in counts {
                let label = if c >= min_count { coarse.lookup(tag) } else { OTHER.to_owned() };
                mapping.insert(tag.clone(), label);
            }
        }
    }
    TagCollapse {
        vocabulary: mapping.values().cloned().collect(),
        mapping,
        coarse: match kind {
            TagKind::Pos(c) => Some(c.clone()),
            TagKind::Dependency => None,
        },
    }
}
