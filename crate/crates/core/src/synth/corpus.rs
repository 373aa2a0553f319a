use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::contour::generate_contour;
use super::spec::{CouplingFeature, SynthSpec, ToneTarget};
use crate::error::{Error, Result};
use crate::features::PhonemeTable;
use crate::ingest::{assemble_corpus, Corpus, F0Sample, F0Track, SyllableRecord, TokenAnnotation};
use crate::preprocess::NgramDataset;
use crate::seed;
use crate::tone::Tone;

pub const GROUND_TRUTH_HEADER: &str = "instance_key,cluster_id";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyllableTruth {
    pub utterance_id: String,
    pub index: usize,
    pub tone: Tone,
    /// Bitmask of the coupling rules that fired.
    pub cluster_id: u32,
    pub target: ToneTarget,
    pub entry_pitch: f64,
}

impl SyllableTruth {
    pub fn key(&self) -> String {
        format!("{}:{}", self.utterance_id, self.index)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub syllables: Vec<SyllableTruth>,
}

impl GroundTruth {
    fn index(&self) -> BTreeMap<(&str, usize), u32> {
        self.syllables
            .iter()
            .map(|s| ((s.utterance_id.as_str(), s.index), s.cluster_id))
            .collect()
    }

    /// Planted cluster of every instance: the tuple of its syllables'
    /// rule masks, renumbered densely in order of first appearance.
    pub fn ngram_labels<T>(&self, dataset: &NgramDataset<T>) -> Result<Vec<usize>> {
        let idx = self.index();
        let n = dataset.category.order();
        let mut ids: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        let mut out = Vec::with_capacity(dataset.instances.len());
        for inst in &dataset.instances {
            let src = &inst.source;
            let profile = (src.first_syllable..src.first_syllable + n)
                .map(|i| {
                    idx.get(&(src.utterance_id.as_str(), i)).copied().ok_or_else(|| {
                        Error::InvalidInput(format!("no ground truth for {}:{i}", src.utterance_id))
                    })
                })
                .collect::<Result<Vec<u32>>>()?;
            let next = ids.len();
            out.push(*ids.entry(profile).or_insert(next));
        }
        Ok(out)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{GROUND_TRUTH_HEADER}")?;
        for s in &self.syllables {
            writeln!(w, "{},{}", s.key(), s.cluster_id)?;
        }
        Ok(())
    }

    /// Reads `instance_key,cluster_id` rows as (key, cluster) pairs.
    pub fn read_csv(path: &Path) -> Result<Vec<(String, u32)>> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut out = Vec::new();
        for (i, line) in f.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') || t == GROUND_TRUTH_HEADER {
                continue;
            }
            let (k, c) = t.rsplit_once(',').ok_or_else(|| Error::parse(path, i + 1, "expected 2 columns"))?;
            let c = c.parse().map_err(|_| Error::parse(path, i + 1, format!("bad cluster id {c:?}")))?;
            out.push((k.to_owned(), c));
        }
        Ok(out)
    }
}

struct Utterance {
    track: F0Track,
    syllables: Vec<SyllableRecord>,
    tokens: Vec<TokenAnnotation>,
    truth: Vec<SyllableTruth>,
}

struct Samplers {
    tones: WeightedIndex<f64>,
    word_length: WeightedIndex<f64>,
    pos: WeightedIndex<f64>,
    dep: WeightedIndex<f64>,
    syllables: Vec<(Vec<String>, bool)>,
}

fn generate_utterance(spec: &SynthSpec, s: &Samplers, i: usize) -> Utterance {
    let mut rng = seed::rng(seed::derive_seed(spec.seed, &["utterance", &i.to_string()]));
    let a = &spec.annotation;
    let utterance_id = format!("utt{i:05}");
    let speaker = &spec.speakers[i % spec.speakers.len()];
    let (lo, hi) = spec.syllables_per_utterance;
    let n = rng.random_range(lo..=hi);

    let tones: Vec<Tone> = (0..n)
        .map(|_| Tone::new(s.tones.sample(&mut rng) as u8).expect("index below 5"))
        .collect();

    let mut tokens = Vec::new();
    let mut covered = 0;
    while covered < n {
        let len = (s.word_length.sample(&mut rng) + 1).min(n - covered);
        tokens.push(TokenAnnotation {
            utterance_id: utterance_id.clone(),
            first_syllable: covered,
            last_syllable: covered + len - 1,
            pos_tag: a.pos_tags[s.pos.sample(&mut rng)].0.clone(),
            dep_function: a.dep_functions[s.dep.sample(&mut rng)].0.clone(),
            in_named_entity: rng.random_bool(a.entity_prob),
            is_singleton: rng.random_bool(a.singleton_prob),
        });
        covered += len;
    }

    let mut syllables = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    let mut masks = Vec::with_capacity(n);
    let step = spec.syllable_duration / spec.samples_per_syllable as f64;
    let at = |k: usize| (k * spec.samples_per_syllable) as f64 * step;
    for tok in &tokens {
        for idx in tok.first_syllable..=tok.last_syllable {
            let (phonemes, nasal) = &s.syllables[rng.random_range(0..s.syllables.len())];
            let latent = rng.random_bool(a.latent_prob);
            let word_initial = idx == tok.first_syllable;
            let word_final = idx == tok.last_syllable;
            let mut mask = 0u32;
            let mut target = spec.targets[tones[idx].value() as usize];
            for (r, rule) in spec.coupling.iter().enumerate() {
                let on = match rule.feature {
                    CouplingFeature::IsEntity => tok.in_named_entity,
                    CouplingFeature::IsSingleton => tok.is_singleton,
                    CouplingFeature::WordInitial => word_initial,
                    CouplingFeature::WordFinal => word_final,
                    CouplingFeature::IsNasal => *nasal,
                    CouplingFeature::Latent => latent,
                };
                if on {
                    mask |= 1 << r;
                    target = target.shifted(rule.intercept_shift, rule.slope_shift);
                }
            }
            syllables.push(SyllableRecord {
                utterance_id: utterance_id.clone(),
                index: idx,
                tone: tones[idx],
                start: at(idx),
                end: at(idx + 1),
                phonemes: phonemes.clone(),
                word_initial,
                word_final,
            });
            targets.push(target);
            masks.push(mask);
        }
    }

    let start = spec.start_pitch.unwrap_or(targets[0].intercept);
    let z = generate_contour(
        &targets,
        start,
        spec.approach_rate,
        spec.noise_std,
        spec.samples_per_syllable,
        &mut rng,
    );
    let samples: Vec<F0Sample> = z
        .iter()
        .enumerate()
        .map(|(j, &v)| F0Sample {
            time: j as f64 * step,
            hz: Some((speaker.mean_log_f0 + speaker.std_log_f0 * v).exp()),
        })
        .collect();
    let truth = (0..n)
        .map(|k| SyllableTruth {
            utterance_id: utterance_id.clone(),
            index: k,
            tone: tones[k],
            cluster_id: masks[k],
            target: targets[k],
            entry_pitch: z[k * spec.samples_per_syllable],
        })
        .collect();
    Utterance {
        track: F0Track {
            utterance_id,
            speaker_id: speaker.id.clone(),
            samples,
        },
        syllables,
        tokens,
        truth,
    }
}

/// Generates a corpus and its planted clusters. Utterances are independent
/// and seeded from `spec.seed` and their index, so output does not depend on
/// thread scheduling.
pub fn generate_corpus(spec: &SynthSpec, phonemes: &PhonemeTable) -> Result<(Corpus, GroundTruth)> {
    spec.validate(phonemes)?;
    let a = &spec.annotation;
    let weights = |name: &str, w: Vec<f64>| {
        WeightedIndex::new(w).map_err(|e| Error::Validation(format!("{name}: {e}")))
    };
    let samplers = Samplers {
        tones: weights("tone_distribution", spec.tone_distribution.to_vec())?,
        word_length: weights("word_length", a.word_length.clone())?,
        pos: weights("pos_tags", a.pos_tags.iter().map(|p| p.1).collect())?,
        dep: weights("dep_functions", a.dep_functions.iter().map(|p| p.1).collect())?,
        syllables: a
            .syllables
            .iter()
            .map(|s| {
                let ph: Vec<String> = s.split_whitespace().map(str::to_owned).collect();
                let nasal = phonemes.syllable_flags(&ph).map(|f| f.nasal);
                nasal.map(|n| (ph, n))
            })
            .collect::<Result<_>>()?,
    };
    let utterances: Vec<Utterance> = (0..spec.utterances)
        .into_par_iter()
        .map(|i| generate_utterance(spec, &samplers, i))
        .collect();

    let mut tracks = Vec::with_capacity(utterances.len());
    let mut syllables = Vec::new();
    let mut tokens = Vec::new();
    let mut truth = GroundTruth::default();
    for u in utterances {
        tracks.push(u.track);
        syllables.extend(u.syllables);
        tokens.extend(u.tokens);
        truth.syllables.extend(u.truth);
    }
    let (corpus, report) = assemble_corpus(tracks, syllables, tokens);
    if report.drop_count() > 0 {
        return Err(Error::Validation(format!(
            "generated corpus lost {} utterances during assembly",
            report.drop_count()
        )));
    }
    Ok((corpus, truth))
}
