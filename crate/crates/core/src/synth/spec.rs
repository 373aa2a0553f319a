use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::PhonemeTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneTarget {
    pub intercept: f64,
    pub slope: f64,
}

impl ToneTarget {
    pub fn at(&self, u: f64) -> f64 {
        self.intercept + self.slope * u
    }

    pub fn shifted(&self, intercept: f64, slope: f64) -> Self {
        ToneTarget {
            intercept: self.intercept + intercept,
            slope: self.slope + slope,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerSpec {
    pub id: String,
    pub mean_log_f0: f64,
    pub std_log_f0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingFeature {
    IsEntity,
    IsSingleton,
    WordInitial,
    WordFinal,
    IsNasal,
    /// Hidden per-syllable coin flip that is not written to any annotation.
    Latent,
}

/// Target shift applied to every syllable that has `feature`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingRule {
    pub feature: CouplingFeature,
    #[serde(default)]
    pub intercept_shift: f64,
    #[serde(default)]
    pub slope_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSpec {
    /// Probability of a word having 1, 2, ... syllables.
    pub word_length: Vec<f64>,
    pub pos_tags: Vec<(String, f64)>,
    pub dep_functions: Vec<(String, f64)>,
    pub entity_prob: f64,
    pub singleton_prob: f64,
    pub latent_prob: f64,
    /// Syllables as space-separated phoneme symbols, drawn uniformly.
    pub syllables: Vec<String>,
}

impl Default for AnnotationSpec {
    fn default() -> Self {
        let w = |pairs: &[(&str, f64)]| pairs.iter().map(|(t, p)| (t.to_string(), *p)).collect();
        AnnotationSpec {
            word_length: vec![0.3, 0.5, 0.15, 0.05],
            pos_tags: w(&[("NN", 0.35), ("VV", 0.2), ("AD", 0.1), ("NR", 0.1), ("P", 0.1), ("DEG", 0.1), ("PU", 0.05)]),
            dep_functions: w(&[
                ("nsubj", 0.2),
                ("dobj", 0.2),
                ("advmod", 0.15),
                ("advmod:loc", 0.05),
                ("nmod", 0.2),
                ("root", 0.1),
                ("case", 0.1),
            ]),
            entity_prob: 0.3,
            singleton_prob: 0.5,
            latent_prob: 0.5,
            syllables: [
                "m a", "m a n", "b a", "d i", "sh i", "j i a", "g u o", "x i e", "zh o ng", "h a o", "l i", "n i",
                "t a", "k e", "q v", "s u", "ch u", "r e n", "f E i", "u a ng",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub speakers: Vec<SpeakerSpec>,
    pub utterances: usize,
    /// Inclusive range of syllables per utterance.
    pub syllables_per_utterance: (usize, usize),
    /// Probabilities of tones 0..=4.
    pub tone_distribution: [f64; 5],
    /// Targets of tones 0..=4 in normalized pitch units.
    pub targets: [ToneTarget; 5],
    pub approach_rate: f64,
    pub noise_std: f64,
    /// Pitch entering the first syllable; `None` starts on that syllable's target.
    pub start_pitch: Option<f64>,
    pub coupling: Vec<CouplingRule>,
    pub annotation: AnnotationSpec,
    pub syllable_duration: f64,
    pub samples_per_syllable: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            speakers: vec![
                SpeakerSpec {
                    id: "spk_a".into(),
                    mean_log_f0: 5.3,
                    std_log_f0: 0.18,
                },
                SpeakerSpec {
                    id: "spk_b".into(),
                    mean_log_f0: 4.9,
                    std_log_f0: 0.15,
                },
                SpeakerSpec {
                    id: "spk_c".into(),
                    mean_log_f0: 5.6,
                    std_log_f0: 0.2,
                },
            ],
            utterances: 2500,
            syllables_per_utterance: (3, 9),
            tone_distribution: [0.1, 0.225, 0.225, 0.225, 0.225],
            targets: [
                ToneTarget {
                    intercept: 0.0,
                    slope: -0.4,
                },
                ToneTarget {
                    intercept: 1.1,
                    slope: 0.0,
                },
                ToneTarget {
                    intercept: -0.6,
                    slope: 1.5,
                },
                ToneTarget {
                    intercept: -1.0,
                    slope: -0.5,
                },
                ToneTarget {
                    intercept: 1.2,
                    slope: -2.2,
                },
            ],
            approach_rate: 8.0,
            noise_std: 0.1,
            start_pitch: None,
            coupling: vec![
                CouplingRule {
                    feature: CouplingFeature::IsEntity,
                    intercept_shift: 1.5,
                    slope_shift: 0.0,
                },
                CouplingRule {
                    feature: CouplingFeature::Latent,
                    intercept_shift: 0.0,
                    slope_shift: 3.0,
                },
            ],
            annotation: AnnotationSpec::default(),
            syllable_duration: 0.2,
            samples_per_syllable: 20,
            seed: 0,
        }
    }
}

fn check_distribution(name: &str, p: impl IntoIterator<Item = f64>) -> Result<()> {
    let mut sum = 0.0;
    for v in p {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Validation(format!("{name}: probabilities must be finite and non-negative")));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!("{name}: probabilities sum to {sum}, not 1")));
    }
    Ok(())
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must be in [0, 1], got {p}")))
    }
}

impl SynthSpec {
    pub fn validate(&self, phonemes: &PhonemeTable) -> Result<()> {
        if self.speakers.is_empty() {
            return Err(Error::Validation("at least one speaker is required".into()));
        }
        for s in &self.speakers {
            if !(s.std_log_f0 > 0.0 && s.mean_log_f0.is_finite() && s.std_log_f0.is_finite()) {
                return Err(Error::Validation(format!("speaker {}: bad log-f0 parameters", s.id)));
            }
        }
        let (lo, hi) = self.syllables_per_utterance;
        if lo == 0 || lo > hi {
            return Err(Error::Validation(format!("bad syllables_per_utterance range ({lo}, {hi})")));
        }
        check_distribution("tone_distribution", self.tone_distribution)?;
        if !(self.approach_rate > 0.0 && self.approach_rate.is_finite()) {
            return Err(Error::Validation(format!("approach_rate must be positive, got {}", self.approach_rate)));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Validation(format!("noise_std must be non-negative, got {}", self.noise_std)));
        }
        if !(self.syllable_duration > 0.0) || self.samples_per_syllable == 0 {
            return Err(Error::Validation("syllable duration and samples per syllable must be positive".into()));
        }
        if self.coupling.len() > 16 {
            return Err(Error::Validation("at most 16 coupling rules are supported".into()));
        }
        let a = &self.annotation;
        check_distribution("word_length", a.word_length.iter().copied())?;
        check_distribution("pos_tags", a.pos_tags.iter().map(|p| p.1))?;
        check_distribution("dep_functions", a.dep_functions.iter().map(|p| p.1))?;
        check_prob("entity_prob", a.entity_prob)?;
        check_prob("singleton_prob", a.singleton_prob)?;
        check_prob("latent_prob", a.latent_prob)?;
        if a.syllables.is_empty() {
            return Err(Error::Validation("syllable inventory is empty".into()));
        }
        for s in &a.syllables {
            let ph: Vec<&str> = s.split_whitespace().collect();
            if ph.is_empty() {
                return Err(Error::Validation("empty syllable in inventory".into()));
            }
            phonemes.syllable_flags(&ph)?;
        }
        Ok(())
    }
}
