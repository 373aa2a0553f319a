use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Built-in attribute table for pinyin-style segments.
pub const DEFAULT_PHONEME_TABLE: &str = include_str!("../../data/phonemes.tsv");

const COLUMNS: [&str; 8] = ["symbol", "nasal", "vowel", "high", "low", "front", "back", "round"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhonemeAttributes {
    pub nasal: bool,
    pub vowel: bool,
    pub high: bool,
    pub low: bool,
    pub front: bool,
    pub back: bool,
    pub round: bool,
}

/// The seven per-syllable phonological flags.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhonologicalFlags {
    pub nasal: bool,
    pub diphthong: bool,
    pub round: bool,
    pub front: bool,
    pub back: bool,
    pub high: bool,
    pub low: bool,
}

impl PhonologicalFlags {
    /// Flags in raw-feature order: nasal, diphthong, round, front, back, high, low.
    pub fn as_array(&self) -> [bool; 7] {
        [self.nasal, self.diphthong, self.round, self.front, self.back, self.high, self.low]
    }
}

#[derive(Debug, Clone)]
pub struct PhonemeTable {
    entries: BTreeMap<String, PhonemeAttributes>,
    hash: String,
}

impl PhonemeTable {
    /// Parses a tab-separated table with columns
    /// `symbol nasal vowel high low front back round`; `#` starts a comment line.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut seen_header = false;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if !seen_header {
                seen_header = true;
                if fields == COLUMNS {
                    continue;
                }
            }
            if fields.len() != COLUMNS.len() {
                return Err(Error::parse(origin, line_no, format!("expected {} columns, got {}", COLUMNS.len(), fields.len())));
            }
            let mut flags = [false; 7];
            for (f, raw) in flags.iter_mut().zip(&fields[1..]) {
                *f = match *raw {
                    "0" => false,
                    "1" => true,
                    other => return Err(Error::parse(origin, line_no, format!("expected 0 or 1, got {other:?}"))),
                };
            }
            let attrs = PhonemeAttributes {
                nasal: flags[0],
                vowel: flags[1],
                high: flags[2],
                low: flags[3],
                front: flags[4],
                back: flags[5],
                round: flags[6],
            };
            if entries.insert(fields[0].to_owned(), attrs).is_some() {
                return Err(Error::parse(origin, line_no, format!("duplicate symbol {:?}", fields[0])));
            }
        }
        if entries.is_empty() {
            return Err(Error::parse(origin, 0, "phoneme table is empty"));
        }
        let hash = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        Ok(PhonemeTable { entries, hash })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, path)
    }

    /// SHA-256 of the table text, hex encoded.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn get(&self, symbol: &str) -> Option<&PhonemeAttributes> {
        self.entries.get(symbol)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Flags for one syllable. Nasal and the place/rounding flags fire if any
    /// segment carries the attribute; a diphthong has two or more vowels.
    pub fn syllable_flags<S: AsRef<str>>(&self, phonemes: &[S]) -> Result<PhonologicalFlags> {
        let mut out = PhonologicalFlags::default();
        let mut vowels = 0;
        for p in phonemes {
            let a = self.get(p.as_ref()).ok_or_else(|| Error::UnknownPhoneme(p.as_ref().to_owned()))?;
            out.nasal |= a.nasal;
            out.round |= a.round;
            out.front |= a.front;
            out.back |= a.back;
            out.high |= a.high;
            out.low |= a.low;
            vowels += a.vowel as usize;
        }
        out.diphthong = vowels >= 2;
        Ok(out)
    }
}

impl Default for PhonemeTable {
    fn default() -> Self {
        Self::parse(DEFAULT_PHONEME_TABLE, Path::new("<builtin phonemes.tsv>")).expect("builtin phoneme table parses")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn man_is_nasal_and_low() {
        let t = PhonemeTable::default();
        let f = t.syllable_flags(&["m", "a", "n"]).unwrap();
        assert!(f.nasal && f.low);
        assert!(!f.high && !f.diphthong && !f.round);
    }

    #[test]
    fn two_vowels_make_a_diphthong() {
        let t = PhonemeTable::default();
        assert!(t.syllable_flags(&["j", "i", "a"]).unwrap().diphthong);
        assert!(!t.syllable_flags(&["j", "i"]).unwrap().diphthong);
    }

    #[test]
    fn unknown_symbol_is_named() {
        let t = PhonemeTable::default();
        match t.syllable_flags(&["m", "@"]) {
            Err(Error::UnknownPhoneme(s)) => assert_eq!(s, "@"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = PhonemeTable::default();
        let b = PhonemeTable::parse("x\t1\t0\t0\t0\t0\t0\t0\n", Path::new("t")).unwrap();
        assert_eq!(a.hash().len(), 64);
        assert_ne!(a.hash(), b.hash());
        assert!(b.get("x").unwrap().nasal);
    }
}
