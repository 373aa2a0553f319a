use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Lexical tone label; 0 is the neutral tone, 1–4 the regular tones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Tone(u8);

impl Tone {
    pub const NEUTRAL: Tone = Tone(0);

    pub fn new(value: u8) -> Result<Self, Error> {
        if value <= 4 {
            Ok(Tone(value))
        } else {
            Err(Error::Validation(format!("tone {value} outside {{0..4}}")))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_neutral(self) -> bool {
        self.0 == 0
    }

    pub fn all() -> impl Iterator<Item = Tone> {
        (0..=4).map(Tone)
    }
}

impl TryFrom<u8> for Tone {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self, Error> {
        Tone::new(v)
    }
}

impl From<Tone> for u8 {
    fn from(t: Tone) -> u8 {
        t.0
    }
}

impl fmt::Display for Tone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A tone n-gram category such as `2-3` or `3-4-2`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ToneCategory(Vec<Tone>);

impl ToneCategory {
    pub fn new(tones: Vec<Tone>) -> Self {
        ToneCategory(tones)
    }

    pub fn tones(&self) -> &[Tone] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// File-name friendly form: `t2-3`.
    pub fn file_stem(&self) -> String {
        format!("t{self}")
    }
}

impl fmt::Display for ToneCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for ToneCategory {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let tones = s
            .split('-')
            .map(|p| {
                p.trim()
                    .parse::<u8>()
                    .map_err(|_| Error::Validation(format!("bad tone category {s:?}")))
                    .and_then(Tone::new)
            })
            .collect::<Result<Vec<_>, _>>()?;
        if tones.is_empty() {
            return Err(Error::Validation("empty tone category".into()));
        }
        Ok(ToneCategory(tones))
    }
}

impl TryFrom<String> for ToneCategory {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<ToneCategory> for String {
    fn from(c: ToneCategory) -> String {
        c.to_string()
    }
}

/// Tone of a neighbouring syllable, or the utterance edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ToneContext {
    Tone(Tone),
    Boundary,
}

impl ToneContext {
    /// Symbols used as one-hot levels: `0`..`4` and `B`.
    pub const SYMBOLS: [&'static str; 6] = ["0", "1", "2", "3", "4", "B"];

    pub fn symbol(self) -> &'static str {
        match self {
            ToneContext::Tone(t) => Self::SYMBOLS[t.value() as usize],
            ToneContext::Boundary => "B",
        }
    }
}
