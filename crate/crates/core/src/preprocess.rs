//! Speaker normalization, track cleaning and fixed-length n-gram datasets.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Corpus, F0Track, SyllableRecord};
use crate::scalar::{mean_std, Scalar};
use crate::tone::{ToneCategory, ToneContext};

/// Speakers need at least this many voiced frames to be normalized.
pub const MIN_VOICED_PER_SPEAKER: usize = 30;
/// Samples further than this many standard deviations from the speaker mean are outliers.
pub const OUTLIER_Z: f64 = 3.0;
/// Contours with fewer voiced frames are not resampled.
pub const MIN_CONTOUR_SAMPLES: usize = 4;
pub const DEFAULT_MIN_CATEGORY_SIZE: usize = 100;

/// Resampled vector length for unigrams, bigrams and trigrams.
pub const VECTOR_LENGTHS: [usize; 3] = [30, 100, 200];

pub fn vector_length(n: usize) -> Option<usize> {
    VECTOR_LENGTHS.get(n.checked_sub(1)?).copied()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerStats {
    pub speaker_id: String,
    pub mean_log_f0: f64,
    pub std_log_f0: f64,
}

impl SpeakerStats {
    #[inline]
    pub fn z(&self, hz: f64) -> f64 {
        (hz.ln() - self.mean_log_f0) / self.std_log_f0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpeakerExclusion {
    TooFewVoiced(usize),
    ZeroVariance,
}

#[derive(Debug, Clone, Default)]
pub struct SpeakerStatsReport {
    pub stats: BTreeMap<String, SpeakerStats>,
    pub excluded: Vec<(String, SpeakerExclusion)>,
}

fn stats_from_logs(speaker: &str, logs: &[f64]) -> std::result::Result<SpeakerStats, SpeakerExclusion> {
    if logs.len() < MIN_VOICED_PER_SPEAKER {
        return Err(SpeakerExclusion::TooFewVoiced(logs.len()));
    }
    let (m, s) = mean_std(logs);
    if !(s > 1e-12) {
        return Err(SpeakerExclusion::ZeroVariance);
    }
    // second pass without outliers
    let kept: Vec<f64> = logs.iter().copied().filter(|&x| ((x - m) / s).abs() <= OUTLIER_Z).collect();
    if kept.len() < MIN_VOICED_PER_SPEAKER {
        return Err(SpeakerExclusion::TooFewVoiced(kept.len()));
    }
    let (m2, s2) = mean_std(&kept);
    if !(s2 > 1e-12) {
        return Err(SpeakerExclusion::ZeroVariance);
    }
    Ok(SpeakerStats {
        speaker_id: speaker.to_owned(),
        mean_log_f0: m2,
        std_log_f0: s2,
    })
}

/// Per-speaker log-f0 mean and standard deviation over voiced, non-outlier frames.
pub fn speaker_stats<'a>(tracks: impl IntoIterator<Item = &'a F0Track>) -> SpeakerStatsReport {
    let mut logs: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for t in tracks {
        let v = logs.entry(t.speaker_id.as_str()).or_default();
        v.extend(t.samples.iter().filter_map(|s| s.hz).map(f64::ln));
    }
    let mut report = SpeakerStatsReport::default();
    for (spk, l) in logs {
        match stats_from_logs(spk, &l) {
            Ok(s) => {
                report.stats.insert(spk.to_owned(), s);
            }
            Err(e) => report.excluded.push((spk.to_owned(), e)),
        }
    }
    report
}

/// Speaker-normalized track; `None` where a frame is unvoiced, an outlier, or
/// outside the interpolated interior.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedTrack {
    pub utterance_id: String,
    pub speaker_id: String,
    pub times: Vec<f64>,
    pub values: Vec<Option<f64>>,
}

impl NormalizedTrack {
    /// True when every frame was removed.
    pub fn is_empty(&self) -> bool {
        self.values.iter().all(Option::is_none)
    }

    /// Linear interpolation of the value at `t` between the two nearest defined frames.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let i = self.times.partition_point(|&x| x < t);
        if i < self.times.len() && self.times[i] == t {
            return self.values[i];
        }
        let (lo, hi) = (i.checked_sub(1)?, i);
        let (a, b) = (self.values[lo]?, *self.values.get(hi)?.as_ref()?);
        let w = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        Some(a + w * (b - a))
    }
}

/// Maps voiced frames to log-f0 z-scores, drops `|z| > 3` outliers and
/// linearly fills interior gaps. Leading and trailing gaps stay empty.
pub fn clean_track(track: &F0Track, stats: &SpeakerStats) -> NormalizedTrack {
    let times: Vec<f64> = track.samples.iter().map(|s| s.time).collect();
    let mut values: Vec<Option<f64>> = track
        .samples
        .iter()
        .map(|s| s.hz.map(|hz| stats.z(hz)).filter(|z| z.abs() <= OUTLIER_Z))
        .collect();
    interpolate_interior(&times, &mut values);
    NormalizedTrack {
        utterance_id: track.utterance_id.clone(),
        speaker_id: track.speaker_id.clone(),
        times,
        values,
    }
}

fn interpolate_interior(times: &[f64], values: &mut [Option<f64>]) {
    let mut last: Option<usize> = None;
    for i in 0..values.len() {
        if let Some(v) = values[i] {
            if let Some(j) = last {
                if i > j + 1 {
                    let a = values[j].expect("anchor is defined");
                    let span = times[i] - times[j];
                    for k in j + 1..i {
                        let w = (times[k] - times[j]) / span;
                        values[k] = Some(a + w * (v - a));
                    }
                }
            }
            last = Some(i);
        }
    }
}

/// Cleaned tracks for every utterance whose speaker could be normalized.
#[derive(Debug, Clone, Default)]
pub struct NormalizedCorpus {
    pub speakers: SpeakerStatsReport,
    pub tracks: BTreeMap<String, NormalizedTrack>,
    pub empty_tracks: usize,
}

pub fn normalize_corpus(corpus: &Corpus) -> NormalizedCorpus {
    let speakers = speaker_stats(corpus.tracks.values());
    let cleaned: Vec<Option<NormalizedTrack>> = corpus
        .tracks
        .values()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|t| speakers.stats.get(&t.speaker_id).map(|s| clean_track(t, s)))
        .collect();
    let mut out = NormalizedCorpus {
        speakers,
        ..Default::default()
    };
    for t in cleaned.into_iter().flatten() {
        if t.is_empty() {
            out.empty_tracks += 1;
        } else {
            out.tracks.insert(t.utterance_id.clone(), t);
        }
    }
    if !out.speakers.excluded.is_empty() {
        info!("excluded {} speaker(s) from normalization", out.speakers.excluded.len());
    }
    out
}

/// Voiced frames of one syllable window.
#[derive(Debug, Clone, PartialEq)]
pub struct RawContour {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl RawContour {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Frames falling in `[start of first syllable, end of last syllable]`.
pub fn cut_contour(track: &NormalizedTrack, window: &[SyllableRecord]) -> Option<RawContour> {
    const EPS: f64 = 1e-9;
    let (first, last) = (window.first()?, window.last()?);
    let (lo, hi) = (first.start - EPS, last.end + EPS);
    let from = track.times.partition_point(|&t| t < lo);
    let mut c = RawContour {
        times: Vec::new(),
        values: Vec::new(),
    };
    for (t, v) in track.times[from..].iter().zip(&track.values[from..]) {
        if *t > hi {
            break;
        }
        if let Some(v) = v {
            c.times.push(*t);
            c.values.push(*v);
        }
    }
    (c.len() >= MIN_CONTOUR_SAMPLES).then_some(c)
}

/// Linear resampling onto `len` equally spaced points spanning the contour.
pub fn resample<T: Scalar>(contour: &RawContour, len: usize) -> Option<Vec<T>> {
    if contour.len() < MIN_CONTOUR_SAMPLES || len < 2 {
        return None;
    }
    let ts: Vec<T> = contour.times.iter().map(|&t| T::lit(t)).collect();
    let vs: Vec<T> = contour.values.iter().map(|&v| T::lit(v)).collect();
    let (t0, t1) = (ts[0], ts[ts.len() - 1]);
    let step = (t1 - t0) / T::from_usize_lossy(len - 1);
    let mut out = Vec::with_capacity(len);
    let mut j = 0;
    for k in 0..len {
        let t = if k + 1 == len { t1 } else { t0 + step * T::from_usize_lossy(k) };
        while j + 2 < ts.len() && ts[j + 1] < t {
            j += 1;
        }
        let (ta, tb) = (ts[j], ts[j + 1]);
        let w = ((t - ta) / (tb - ta)).max(T::zero()).min(T::one());
        out.push(vs[j] + w * (vs[j + 1] - vs[j]));
    }
    Some(out)
}

/// Resamples to the fixed vector length for n-gram order `n`.
pub fn downsample<T: Scalar>(contour: &RawContour, n: usize) -> Option<Vec<T>> {
    resample(contour, vector_length(n)?)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InstanceSource {
    pub utterance_id: String,
    pub first_syllable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NgramInstance<T> {
    pub instance_id: u64,
    pub category: ToneCategory,
    pub f0_vector: Vec<T>,
    pub start_pitch: T,
    pub end_pitch: T,
    pub prev_tone: ToneContext,
    pub next_tone: ToneContext,
    pub sentence_position: T,
    pub source: InstanceSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NgramDataset<T> {
    pub category: ToneCategory,
    pub instances: Vec<NgramInstance<T>>,
}

impl<T: Scalar> NgramDataset<T> {
    pub fn order(&self) -> usize {
        self.category.order()
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn vectors(&self) -> Vec<&[T]> {
        self.instances.iter().map(|i| i.f0_vector.as_slice()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct DatasetBuild<T> {
    pub datasets: BTreeMap<ToneCategory, NgramDataset<T>>,
    /// Categories dropped for having fewer than the minimum instances.
    pub sparse: Vec<(ToneCategory, usize)>,
    /// Windows whose contour had too few voiced frames.
    pub short_windows: usize,
}

/// `first / (count - 1)`, or 0 for single-syllable utterances.
pub fn sentence_position(first: usize, utterance_len: usize) -> f64 {
    if utterance_len <= 1 {
        0.0
    } else {
        first as f64 / (utterance_len - 1) as f64
    }
}

/// Slides an `n`-syllable window over every utterance and collects resampled
/// contours per tone category. For `n > 1`, windows containing the neutral
/// tone are skipped. Instance ids follow (utterance, first syllable) order.
pub fn build_ngram_datasets<T: Scalar>(
    corpus: &Corpus,
    normalized: &NormalizedCorpus,
    n: usize,
    min_category_size: usize,
) -> Result<DatasetBuild<T>> {
    if vector_length(n).is_none() {
        return Err(Error::InvalidInput(format!("n-gram order must be 1, 2 or 3, got {n}")));
    }
    let utts: Vec<(&String, &Vec<SyllableRecord>)> = corpus
        .syllables
        .iter()
        .filter(|(u, _)| normalized.tracks.contains_key(*u))
        .collect();

    type Candidate<T> = (ToneCategory, Option<NgramInstance<T>>);
    let per_utt: Vec<Vec<Candidate<T>>> = utts
        .par_iter()
        .map(|(utt, syls)| {
            let track = &normalized.tracks[*utt];
            let mut out = Vec::new();
            if syls.len() < n {
                return out;
            }
            for first in 0..=syls.len() - n {
                let window = &syls[first..first + n];
                if n > 1 && window.iter().any(|s| s.tone.is_neutral()) {
                    continue;
                }
                let category = ToneCategory::new(window.iter().map(|s| s.tone).collect());
                let inst = cut_contour(track, window).and_then(|c| downsample::<T>(&c, n)).map(|v| {
                    let context = |i: Option<usize>| {
                        i.and_then(|i| syls.get(i))
                            .map_or(ToneContext::Boundary, |s| ToneContext::Tone(s.tone))
                    };
                    NgramInstance {
                        instance_id: 0,
                        category: category.clone(),
                        start_pitch: v[0],
                        end_pitch: v[v.len() - 1],
                        f0_vector: v,
                        prev_tone: context(first.checked_sub(1)),
                        next_tone: context(Some(first + n)),
                        sentence_position: T::lit(sentence_position(first, syls.len())),
                        source: InstanceSource {
                            utterance_id: (*utt).clone(),
                            first_syllable: first,
                        },
                    }
                });
                out.push((category, inst));
            }
            out
        })
        .collect();

    let mut by_cat: BTreeMap<ToneCategory, Vec<NgramInstance<T>>> = BTreeMap::new();
    let mut next_id = 0u64;
    let mut short_windows = 0;
    for (cat, inst) in per_utt.into_iter().flatten() {
        match inst {
            Some(mut i) => {
                i.instance_id = next_id;
                next_id += 1;
                by_cat.entry(cat).or_default().push(i);
            }
            None => short_windows += 1,
        }
    }
    let mut build = DatasetBuild {
        datasets: BTreeMap::new(),
        sparse: Vec::new(),
        short_windows,
    };
    for (category, instances) in by_cat {
        if instances.len() < min_category_size {
            build.sparse.push((category, instances.len()));
        } else {
            build.datasets.insert(category.clone(), NgramDataset { category, instances });
        }
    }
    Ok(build)
}

pub const DATASET_FORMAT: &str = "toneshape-ngram-dataset";
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct DatasetHeader {
    format: String,
    version: u32,
    category: ToneCategory,
    n: usize,
    length: usize,
    instances: usize,
}

/// Writes a dataset as JSON lines: a header record followed by one instance per line.
pub fn write_dataset<T: Scalar, W: Write>(mut w: W, ds: &NgramDataset<T>) -> Result<()> {
    let header = DatasetHeader {
        format: DATASET_FORMAT.into(),
        version: DATASET_VERSION,
        category: ds.category.clone(),
        n: ds.order(),
        length: vector_length(ds.order()).unwrap_or(0),
        instances: ds.len(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for inst in &ds.instances {
        serde_json::to_writer(&mut w, inst)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_dataset<T: Scalar>(path: &Path) -> Result<NgramDataset<T>> {
    let mut lines = BufReader::new(File::open(path)?)
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.as_ref().is_ok_and(|l| l.trim().is_empty() || l.starts_with('#')));
    let (first_no, first) = lines.next().ok_or_else(|| Error::parse(path, 1, "empty dataset file"))?;
    let header: DatasetHeader =
        serde_json::from_str(&first?).map_err(|e| Error::parse(path, first_no + 1, e.to_string()))?;
    if header.format != DATASET_FORMAT || header.version != DATASET_VERSION {
        return Err(Error::parse(
            path,
            first_no + 1,
            format!("unsupported dataset format {} v{}", header.format, header.version),
        ));
    }
    let mut instances = Vec::with_capacity(header.instances);
    for (i, line) in lines {
        let line = line?;
        let inst: NgramInstance<T> =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        if inst.category != header.category || inst.f0_vector.len() != header.length {
            return Err(Error::parse(path, i + 1, "instance does not match dataset header"));
        }
        instances.push(inst);
    }
    Ok(NgramDataset {
        category: header.category,
        instances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::F0Sample;

    fn track(spk: &str, hz: &[f64]) -> F0Track {
        F0Track {
            utterance_id: "u".into(),
            speaker_id: spk.into(),
            samples: hz
                .iter()
                .enumerate()
                .map(|(i, &h)| F0Sample {
                    time: i as f64 * 0.01,
                    hz: Some(h),
                })
                .collect(),
        }
    }

    fn stats(m: f64, s: f64) -> SpeakerStats {
        SpeakerStats {
            speaker_id: "s".into(),
            mean_log_f0: m,
            std_log_f0: s,
        }
    }

    #[test]
    fn constant_speaker_is_degenerate() {
        let r = speaker_stats([&track("s", &[100.0; 50])]);
        assert!(r.stats.is_empty());
        assert_eq!(r.excluded, vec![("s".into(), SpeakerExclusion::ZeroVariance)]);
    }

    #[test]
    fn two_level_speaker_mean() {
        let hz: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 4.5f64.exp() } else { 4.7f64.exp() }).collect();
        let r = speaker_stats([&track("s", &hz)]);
        let s = &r.stats["s"];
        assert!((s.mean_log_f0 - 4.6).abs() < 1e-12);
        assert!((s.std_log_f0 - 0.1).abs() < 1e-12);
    }

    #[test]
    fn sparse_speaker_excluded() {
        let r = speaker_stats([&track("s", &[100.0, 120.0, 110.0, 105.0, 90.0, 95.0, 130.0, 99.0, 101.0, 102.0])]);
        assert_eq!(r.excluded, vec![("s".into(), SpeakerExclusion::TooFewVoiced(10))]);
    }

    #[test]
    fn sample_at_mean_maps_to_zero() {
        let st = stats(100f64.ln(), 0.2);
        let t = clean_track(&track("s", &[100.0]), &st);
        assert_eq!(t.values, vec![Some(0.0)]);
    }

    #[test]
    fn midpoint_of_gap() {
        let t = NormalizedTrack {
            utterance_id: "u".into(),
            speaker_id: "s".into(),
            times: vec![0.0, 0.1],
            values: vec![Some(0.0), Some(1.0)],
        };
        assert!((t.value_at(0.05).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn outlier_removed_then_interpolated() {
        let st = stats(0.0, 1.0);
        // z = ln(hz); the middle frame sits at z = 3.5
        let t = clean_track(&track("s", &[1.0, 3.5f64.exp(), 1.0]), &st);
        assert_eq!(t.values, vec![Some(0.0), Some(0.0), Some(0.0)]);
    }

    #[test]
    fn edge_gaps_stay_absent() {
        let mut tr = track("s", &[1.0, 1.0, 1.0, 1.0]);
        tr.samples[0].hz = None;
        tr.samples[2].hz = None;
        let t = clean_track(&tr, &stats(0.0, 1.0));
        assert_eq!(t.values, vec![None, Some(0.0), Some(0.0), Some(0.0)]);
        tr.samples[3].hz = None;
        let t = clean_track(&tr, &stats(0.0, 1.0));
        assert_eq!(t.values, vec![None, Some(0.0), None, None]);
    }

    #[test]
    fn fully_removed_track_is_empty() {
        let t = clean_track(&track("s", &[1000.0, 1000.0]), &stats(0.0, 1.0));
        assert!(t.is_empty());
    }

    fn ntrack(times: Vec<f64>, values: Vec<Option<f64>>) -> NormalizedTrack {
        NormalizedTrack {
            utterance_id: "u".into(),
            speaker_id: "s".into(),
            times,
            values,
        }
    }

    fn syl(index: usize, start: f64, end: f64) -> SyllableRecord {
        SyllableRecord {
            utterance_id: "u".into(),
            index,
            tone: crate::tone::Tone::new(1).unwrap(),
            start,
            end,
            phonemes: vec!["a".into()],
            word_initial: true,
            word_final: true,
        }
    }

    #[test]
    fn cut_counts_inclusive_bounds() {
        let times: Vec<f64> = (0..=50).map(|k| k as f64 * 0.01).collect();
        let t = ntrack(times.clone(), vec![Some(0.0); times.len()]);
        let c = cut_contour(&t, &[syl(0, 0.1, 0.3)]).unwrap();
        assert_eq!(c.len(), 21);
        // a bigram window spans both syllables
        let c = cut_contour(&t, &[syl(0, 0.1, 0.3), syl(1, 0.3, 0.45)]).unwrap();
        assert_eq!(c.len(), 36);
        assert_eq!((c.times[0], *c.times.last().unwrap()), (0.1, 0.45));
    }

    #[test]
    fn cut_needs_four_voiced() {
        let t = ntrack(vec![0.0, 0.1, 0.2, 0.3], vec![Some(0.0), None, None, Some(1.0)]);
        assert!(cut_contour(&t, &[syl(0, 0.0, 0.3)]).is_none());
    }

    fn contour(times: Vec<f64>, values: Vec<f64>) -> RawContour {
        RawContour { times, values }
    }

    #[test]
    fn constant_contour_resamples_to_ones() {
        let c = contour(vec![0.0, 0.1, 0.2, 0.3, 0.4], vec![1.0; 5]);
        assert_eq!(downsample::<f64>(&c, 1).unwrap(), vec![1.0; 30]);
    }

    #[test]
    fn ramp_matches_closed_form() {
        let times: Vec<f64> = (0..7).map(|k| k as f64 * 0.05).collect();
        let values: Vec<f64> = times.iter().map(|t| t / 0.3).collect();
        let v = downsample::<f64>(&contour(times, values), 1).unwrap();
        for (k, x) in v.iter().enumerate() {
            assert!((x - k as f64 / 29.0).abs() < 1e-12, "k={k}: {x}");
        }
        let v32 = downsample::<f32>(&contour((0..7).map(|k| k as f64 * 0.05).collect(), (0..7).map(|k| k as f64 / 6.0).collect()), 1).unwrap();
        assert!((v32[29] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn trigram_length() {
        let c = contour(vec![0.0, 0.2, 0.4, 0.6], vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(downsample::<f64>(&c, 3).unwrap().len(), 200);
        assert_eq!(downsample::<f64>(&c, 2).unwrap().len(), 100);
        assert_eq!(VECTOR_LENGTHS, [30, 100, 200]);
    }

    #[test]
    fn sentence_position_formula() {
        assert!((sentence_position(1, 4) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(sentence_position(0, 1), 0.0);
    }
}
