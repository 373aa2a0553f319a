//! Corpus file formats and assembly.
//!
//! Three line-oriented UTF-8 files describe a corpus:
//!
//! * f0 tracks, JSON lines: `{"utt": "u1", "spk": "s1", "f0": [[0.00, 112.5], [0.01, null], ...]}`
//!   where `null` marks an unvoiced frame;
//! * segmentation, TSV: `utt idx tone start end phonemes word_flags`, phonemes
//!   space separated, `word_flags` one of `I`, `F`, `IF`, `-`;
//! * annotations, TSV: `utt first_syl last_syl pos dep entity singleton`, the
//!   last two as `0`/`1`.
//!
//! TSV files may start with a header row whose first field is `utt`; lines
//! starting with `#` are comments.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tone::Tone;

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F0Sample {
    pub time: f64,
    /// `None` for unvoiced frames.
    pub hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct F0Track {
    pub utterance_id: String,
    pub speaker_id: String,
    pub samples: Vec<F0Sample>,
}

impl F0Track {
    /// Median spacing between consecutive frames, or 0 for tracks with fewer than two frames.
    pub fn sample_period(&self) -> f64 {
        let mut gaps: Vec<f64> = self.samples.windows(2).map(|w| w[1].time - w[0].time).collect();
        if gaps.is_empty() {
            return 0.0;
        }
        gaps.sort_by(f64::total_cmp);
        gaps[gaps.len() / 2]
    }

    pub fn voiced_count(&self) -> usize {
        self.samples.iter().filter(|s| s.hz.is_some()).count()
    }

    pub fn time_range(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.time, self.samples.last()?.time))
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.samples.windows(2) {
            if w[1].time <= w[0].time {
                return Err(Error::Validation(format!(
                    "utterance {}: times not strictly increasing at t={}",
                    self.utterance_id, w[1].time
                )));
            }
        }
        for s in &self.samples {
            if !s.time.is_finite() {
                return Err(Error::Validation(format!("utterance {}: non-finite time", self.utterance_id)));
            }
            if let Some(hz) = s.hz {
                if !(hz > 0.0 && hz.is_finite()) {
                    return Err(Error::Validation(format!(
                        "utterance {}: voiced f0 must be positive, got {hz} at t={}",
                        self.utterance_id, s.time
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyllableRecord {
    pub utterance_id: String,
    pub index: usize,
    pub tone: Tone,
    pub start: f64,
    pub end: f64,
    pub phonemes: Vec<String>,
    pub word_initial: bool,
    pub word_final: bool,
}

impl SyllableRecord {
    fn word_flags(&self) -> &'static str {
        match (self.word_initial, self.word_final) {
            (true, true) => "IF",
            (true, false) => "I",
            (false, true) => "F",
            (false, false) => "-",
        }
    }
}

/// Word-position flags for a word-segmented spelling where each character is
/// one syllable and `|` separates words: `"AB|C"` gives
/// `[(true, false), (false, true), (true, true)]`.
pub fn word_flags_from_spelling(spelling: &str) -> Vec<(bool, bool)> {
    let mut flags = Vec::new();
    for word in spelling.split('|') {
        let k = word.chars().count();
        for i in 0..k {
            flags.push((i == 0, i + 1 == k));
        }
    }
    flags
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenAnnotation {
    pub utterance_id: String,
    /// Inclusive syllable index range.
    pub first_syllable: usize,
    pub last_syllable: usize,
    pub pos_tag: String,
    pub dep_function: String,
    pub in_named_entity: bool,
    pub is_singleton: bool,
}

impl TokenAnnotation {
    pub fn covers(&self, index: usize) -> bool {
        (self.first_syllable..=self.last_syllable).contains(&index)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct F0Record {
    utt: String,
    spk: String,
    f0: Vec<(f64, Option<f64>)>,
}

pub fn load_f0_tracks(path: &Path) -> Result<Vec<F0Track>> {
    let reader = BufReader::new(File::open(path)?);
    let mut tracks = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let rec: F0Record =
            serde_json::from_str(trimmed).map_err(|e| Error::parse(path, lineno + 1, e.to_string()))?;
        if !seen.insert(rec.utt.clone()) {
            return Err(Error::Validation(format!("duplicate f0 track for utterance {}", rec.utt)));
        }
        let track = F0Track {
            utterance_id: rec.utt,
            speaker_id: rec.spk,
            samples: rec.f0.into_iter().map(|(time, hz)| F0Sample { time, hz }).collect(),
        };
        track.validate()?;
        tracks.push(track);
    }
    Ok(tracks)
}

pub fn write_f0_tracks<'a, W: Write>(mut w: W, tracks: impl IntoIterator<Item = &'a F0Track>) -> Result<()> {
    for t in tracks {
        let rec = F0Record {
            utt: t.utterance_id.clone(),
            spk: t.speaker_id.clone(),
            f0: t.samples.iter().map(|s| (s.time, s.hz)).collect(),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Yields `(line number, fields)` for data rows of a TSV file.
fn tsv_rows(path: &Path, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(str::to_owned).collect();
        if rows.is_empty() && fields.first().map(String::as_str) == Some(header) {
            continue;
        }
        rows.push((lineno + 1, fields));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, fields: &[String], i: usize, name: &str) -> Result<T> {
    fields
        .get(i)
        .ok_or_else(|| Error::parse(path, line, format!("missing column {name}")))?
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("bad value {:?} for {name}", fields[i])))
}

fn flag01(path: &Path, line: usize, fields: &[String], i: usize, name: &str) -> Result<bool> {
    match field::<u8>(path, line, fields, i, name)? {
        0 => Ok(false),
        1 => Ok(true),
        v => Err(Error::parse(path, line, format!("{name} must be 0 or 1, got {v}"))),
    }
}

pub const SEGMENTATION_HEADER: &str = "utt\tidx\ttone\tstart\tend\tphonemes\tword_flags";
pub const ANNOTATION_HEADER: &str = "utt\tfirst_syl\tlast_syl\tpos\tdep\tentity\tsingleton";

/// Loads syllable records, grouped by utterance and sorted by start time.
pub fn load_segmentation(path: &Path) -> Result<Vec<SyllableRecord>> {
    let mut by_utt: BTreeMap<String, Vec<SyllableRecord>> = BTreeMap::new();
    for (line, f) in tsv_rows(path, "utt")? {
        if f.len() != 7 {
            return Err(Error::parse(path, line, format!("expected 7 columns, found {}", f.len())));
        }
        let tone_raw: u8 = field(path, line, &f, 2, "tone")?;
        let tone = Tone::new(tone_raw)
            .map_err(|_| Error::Validation(format!("{}:{line}: tone {tone_raw} outside {{0..4}}", path.display())))?;
        let start: f64 = field(path, line, &f, 3, "start")?;
        let end: f64 = field(path, line, &f, 4, "end")?;
        if !(start < end) {
            return Err(Error::Validation(format!(
                "{}:{line}: syllable start {start} not before end {end}",
                path.display()
            )));
        }
        let phonemes: Vec<String> = f[5].split_whitespace().map(str::to_owned).collect();
        if phonemes.is_empty() {
            return Err(Error::parse(path, line, "empty phoneme list"));
        }
        let (word_initial, word_final) = match f[6].trim() {
            "I" => (true, false),
            "F" => (false, true),
            "IF" => (true, true),
            "-" => (false, false),
            other => return Err(Error::parse(path, line, format!("bad word_flags {other:?}"))),
        };
        by_utt.entry(f[0].clone()).or_default().push(SyllableRecord {
            utterance_id: f[0].clone(),
            index: field(path, line, &f, 1, "idx")?,
            tone,
            start,
            end,
            phonemes,
            word_initial,
            word_final,
        });
    }
    let mut out = Vec::new();
    for (utt, mut syls) in by_utt {
        syls.sort_by(|a, b| a.start.total_cmp(&b.start));
        for (pos, s) in syls.iter().enumerate() {
            if s.index != pos {
                return Err(Error::Validation(format!(
                    "utterance {utt}: syllable indexes must be 0..n in time order (found {} at position {pos})",
                    s.index
                )));
            }
        }
        for w in syls.windows(2) {
            if w[1].start < w[0].end - TIME_EPS {
                return Err(Error::Validation(format!(
                    "utterance {utt}: syllables {} and {} overlap",
                    w[0].index, w[1].index
                )));
            }
        }
        out.extend(syls);
    }
    Ok(out)
}

pub fn write_segmentation<'a, W: Write>(
    mut w: W,
    syllables: impl IntoIterator<Item = &'a SyllableRecord>,
) -> Result<()> {
    writeln!(w, "{SEGMENTATION_HEADER}")?;
    for s in syllables {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            s.utterance_id,
            s.index,
            s.tone,
            s.start,
            s.end,
            s.phonemes.join(" "),
            s.word_flags()
        )?;
    }
    Ok(())
}

pub fn load_annotations(path: &Path) -> Result<Vec<TokenAnnotation>> {
    let mut out = Vec::new();
    for (line, f) in tsv_rows(path, "utt")? {
        if f.len() != 7 {
            return Err(Error::parse(path, line, format!("expected 7 columns, found {}", f.len())));
        }
        let first_syllable: usize = field(path, line, &f, 1, "first_syl")?;
        let last_syllable: usize = field(path, line, &f, 2, "last_syl")?;
        if first_syllable > last_syllable {
            return Err(Error::Validation(format!(
                "{}:{line}: token span {first_syllable}..{last_syllable} is reversed",
                path.display()
            )));
        }
        out.push(TokenAnnotation {
            utterance_id: f[0].clone(),
            first_syllable,
            last_syllable,
            pos_tag: f[3].trim().to_owned(),
            dep_function: f[4].trim().to_owned(),
            in_named_entity: flag01(path, line, &f, 5, "entity")?,
            is_singleton: flag01(path, line, &f, 6, "singleton")?,
        });
    }
    Ok(out)
}

pub fn write_annotations<'a, W: Write>(
    mut w: W,
    annotations: impl IntoIterator<Item = &'a TokenAnnotation>,
) -> Result<()> {
    writeln!(w, "{ANNOTATION_HEADER}")?;
    for a in annotations {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            a.utterance_id,
            a.first_syllable,
            a.last_syllable,
            a.pos_tag,
            a.dep_function,
            u8::from(a.in_named_entity),
            u8::from(a.is_singleton)
        )?;
    }
    Ok(())
}

/// Maps every syllable of an utterance to the index of its covering token.
///
/// Fails when a syllable is uncovered, covered twice, or a span runs past the
/// utterance.
pub fn check_coverage(utterance: &str, n_syllables: usize, tokens: &[TokenAnnotation]) -> Result<Vec<usize>> {
    let mut owner: Vec<Option<usize>> = vec![None; n_syllables];
    for (ti, tok) in tokens.iter().enumerate() {
        if tok.last_syllable >= n_syllables {
            return Err(Error::Validation(format!(
                "utterance {utterance}: token span {}..{} exceeds {n_syllables} syllables",
                tok.first_syllable, tok.last_syllable
            )));
        }
        for slot in &mut owner[tok.first_syllable..=tok.last_syllable] {
            if slot.is_some() {
                return Err(Error::Validation(format!(
                    "utterance {utterance}: syllable covered by more than one token"
                )));
            }
            *slot = Some(ti);
        }
    }
    owner
        .into_iter()
        .enumerate()
        .map(|(index, o)| {
            o.ok_or_else(|| Error::UncoveredSyllable {
                utterance: utterance.to_owned(),
                index,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum DropReason {
    MissingTrack,
    MissingSegmentation,
    MissingAnnotations,
    SpanOutsideTrack { index: usize },
    Coverage(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AssemblyReport {
    pub dropped: Vec<(String, DropReason)>,
}

impl AssemblyReport {
    pub fn drop_count(&self) -> usize {
        self.dropped.len()
    }
}

/// Aligned, validated corpus. Immutable once assembled.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub tracks: BTreeMap<String, F0Track>,
    pub syllables: BTreeMap<String, Vec<SyllableRecord>>,
    pub annotations: BTreeMap<String, Vec<TokenAnnotation>>,
    pub utterance_lengths: BTreeMap<String, usize>,
    token_of_syllable: BTreeMap<String, Vec<usize>>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn utterance_ids(&self) -> impl Iterator<Item = &str> {
        self.tracks.keys().map(String::as_str)
    }

    /// Token annotation covering syllable `index` of `utterance`.
    pub fn token_for(&self, utterance: &str, index: usize) -> Option<&TokenAnnotation> {
        let ti = *self.token_of_syllable.get(utterance)?.get(index)?;
        self.annotations.get(utterance)?.get(ti)
    }

    pub fn syllable_count(&self) -> usize {
        self.utterance_lengths.values().sum()
    }

    /// Writes the three corpus files into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<CorpusPaths> {
        std::fs::create_dir_all(dir)?;
        let paths = CorpusPaths::in_dir(dir);
        let mut f = BufWriter::new(File::create(&paths.f0)?);
        write_f0_tracks(&mut f, self.tracks.values())?;
        f.flush()?;
        let mut f = BufWriter::new(File::create(&paths.segmentation)?);
        write_segmentation(&mut f, self.syllables.values().flatten())?;
        f.flush()?;
        let mut f = BufWriter::new(File::create(&paths.annotations)?);
        write_annotations(&mut f, self.annotations.values().flatten())?;
        f.flush()?;
        Ok(paths)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusPaths {
    pub f0: PathBuf,
    pub segmentation: PathBuf,
    pub annotations: PathBuf,
}

impl CorpusPaths {
    pub fn in_dir(dir: &Path) -> Self {
        CorpusPaths {
            f0: dir.join("f0.jsonl"),
            segmentation: dir.join("segmentation.tsv"),
            annotations: dir.join("annotations.tsv"),
        }
    }
}

fn group<T: Clone>(items: Vec<T>, key: impl Fn(&T) -> &str) -> BTreeMap<String, Vec<T>> {
    let mut m: BTreeMap<String, Vec<T>> = BTreeMap::new();
    for it in items {
        m.entry(key(&it).to_owned()).or_default().push(it);
    }
    m
}

/// Aligns the three layers. Utterances missing a layer or failing a
/// consistency check are dropped and listed in the report.
pub fn assemble_corpus(
    tracks: Vec<F0Track>,
    syllables: Vec<SyllableRecord>,
    annotations: Vec<TokenAnnotation>,
) -> (Corpus, AssemblyReport) {
    let mut tracks: BTreeMap<String, F0Track> =
        tracks.into_iter().map(|t| (t.utterance_id.clone(), t)).collect();
    let mut syl = group(syllables, |s| &s.utterance_id);
    let mut ann = group(annotations, |a| &a.utterance_id);
    let mut report = AssemblyReport::default();
    let mut corpus = Corpus::default();

    let mut ids: std::collections::BTreeSet<String> = tracks.keys().cloned().collect();
    ids.extend(syl.keys().cloned());
    ids.extend(ann.keys().cloned());

    for utt in ids {
        let (track, mut syls, mut toks) = match (tracks.remove(&utt), syl.remove(&utt), ann.remove(&utt)) {
            (Some(t), Some(s), Some(a)) => (t, s, a),
            (None, _, _) => {
                report.dropped.push((utt, DropReason::MissingTrack));
                continue;
            }
            (_, None, _) => {
                report.dropped.push((utt, DropReason::MissingSegmentation));
                continue;
            }
            (_, _, None) => {
                report.dropped.push((utt, DropReason::MissingAnnotations));
                continue;
            }
        };
        syls.sort_by_key(|s| s.index);
        toks.sort_by_key(|t| t.first_syllable);
        let (t0, t1) = track.time_range().unwrap_or((f64::INFINITY, f64::NEG_INFINITY));
        if let Some(bad) = syls.iter().find(|s| s.start < t0 - TIME_EPS || s.end > t1 + TIME_EPS) {
            report.dropped.push((utt, DropReason::SpanOutsideTrack { index: bad.index }));
            continue;
        }
        let owner = match check_coverage(&utt, syls.len(), &toks) {
            Ok(o) => o,
            Err(e) => {
                report.dropped.push((utt, DropReason::Coverage(e.to_string())));
                continue;
            }
        };
        corpus.utterance_lengths.insert(utt.clone(), syls.len());
        corpus.token_of_syllable.insert(utt.clone(), owner);
        corpus.tracks.insert(utt.clone(), track);
        corpus.syllables.insert(utt.clone(), syls);
        corpus.annotations.insert(utt, toks);
    }
    if report.drop_count() > 0 {
        info!("dropped {} utterance(s) during corpus assembly", report.drop_count());
    }
    (corpus, report)
}

/// Loads the three corpus files (in parallel) and assembles them.
pub fn load_corpus(paths: &CorpusPaths) -> Result<(Corpus, AssemblyReport)> {
    let (tracks, (syls, anns)) = rayon::join(
        || load_f0_tracks(&paths.f0),
        || rayon::join(|| load_segmentation(&paths.segmentation), || load_annotations(&paths.annotations)),
    );
    Ok(assemble_corpus(tracks?, syls?, anns?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_voiced_track() {
        let f = tmp(r#"{"utt":"u1","spk":"s1","f0":[[0.0,100],[0.01,110],[0.02,120]]}"#);
        let t = load_f0_tracks(f.path()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].voiced_count(), 3);
        let hz: Vec<_> = t[0].samples.iter().map(|s| s.hz.unwrap()).collect();
        assert_eq!(hz, vec![100.0, 110.0, 120.0]);
        assert!((t[0].sample_period() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn unvoiced_marker_preserved() {
        let f = tmp(r#"{"utt":"u1","spk":"s1","f0":[[0.0,100],[0.01,null],[0.02,120]]}"#);
        let t = load_f0_tracks(f.path()).unwrap();
        assert_eq!(t[0].samples[1].hz, None);
        assert_eq!(t[0].samples.len(), 3);
    }

    #[test]
    fn negative_hz_rejected() {
        let f = tmp(r#"{"utt":"u1","spk":"s1","f0":[[0.0,100],[0.01,-5]]}"#);
        assert!(matches!(load_f0_tracks(f.path()), Err(Error::Validation(_))));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let f = tmp("{\"utt\":\"u1\",\"spk\":\"s1\",\"f0\":[]}\n{not json}\n");
        match load_f0_tracks(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_monotonic_times_rejected() {
        let f = tmp(r#"{"utt":"u1","spk":"s1","f0":[[0.02,100],[0.01,110]]}"#);
        assert!(matches!(load_f0_tracks(f.path()), Err(Error::Validation(_))));
    }

    #[test]
    fn segmentation_two_syllables() {
        let f = tmp("utt\tidx\ttone\tstart\tend\tphonemes\tword_flags\nu1\t1\t4\t0.2\t0.4\tm a\tF\nu1\t0\t2\t0.0\t0.2\tn i\tI\n");
        let s = load_segmentation(f.path()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].index, s[0].tone.value()), (0, 2));
        assert_eq!((s[1].index, s[1].tone.value()), (1, 4));
        assert!(s[0].word_initial && !s[0].word_final);
        assert!(!s[1].word_initial && s[1].word_final);
    }

    #[test]
    fn spelling_flags() {
        assert_eq!(
            word_flags_from_spelling("AB|C"),
            vec![(true, false), (false, true), (true, true)]
        );
    }

    #[test]
    fn tone_out_of_alphabet() {
        let f = tmp("u1\t0\t7\t0.0\t0.2\tm a\tIF\n");
        assert!(matches!(load_segmentation(f.path()), Err(Error::Validation(_))));
    }

    #[test]
    fn overlapping_syllables_rejected() {
        let f = tmp("u1\t0\t1\t0.0\t0.3\tm a\tI\nu1\t1\t1\t0.2\t0.4\tm a\tF\n");
        assert!(matches!(load_segmentation(f.path()), Err(Error::Validation(_))));
    }

    #[test]
    fn annotation_row() {
        let f = tmp("utt\tfirst_syl\tlast_syl\tpos\tdep\tentity\tsingleton\nu1\t0\t1\tNN\tnsubj\t1\t0\n");
        let a = load_annotations(f.path()).unwrap();
        assert_eq!(
            a,
            vec![TokenAnnotation {
                utterance_id: "u1".into(),
                first_syllable: 0,
                last_syllable: 1,
                pos_tag: "NN".into(),
                dep_function: "nsubj".into(),
                in_named_entity: true,
                is_singleton: false,
            }]
        );
    }

    fn tok(first: usize, last: usize) -> TokenAnnotation {
        TokenAnnotation {
            utterance_id: "u".into(),
            first_syllable: first,
            last_syllable: last,
            pos_tag: "NN".into(),
            dep_function: "dep".into(),
            in_named_entity: false,
            is_singleton: true,
        }
    }

    #[test]
    fn coverage_full_and_gap() {
        assert_eq!(check_coverage("u", 3, &[tok(0, 0), tok(1, 2)]).unwrap(), vec![0, 1, 1]);
        match check_coverage("u", 3, &[tok(0, 0), tok(2, 2)]) {
            Err(Error::UncoveredSyllable { utterance, index }) => {
                assert_eq!((utterance.as_str(), index), ("u", 1));
            }
            other => panic!("{other:?}"),
        }
    }

    fn utterance(id: &str, track_end: f64) -> (F0Track, Vec<SyllableRecord>, Vec<TokenAnnotation>) {
        let samples = (0..=((track_end / 0.01).round() as usize))
            .map(|k| F0Sample {
                time: k as f64 * 0.01,
                hz: Some(120.0),
            })
            .collect();
        let track = F0Track {
            utterance_id: id.into(),
            speaker_id: "s".into(),
            samples,
        };
        let syl = SyllableRecord {
            utterance_id: id.into(),
            index: 0,
            tone: Tone::new(1).unwrap(),
            start: 0.0,
            end: 0.2,
            phonemes: vec!["m".into(), "a".into()],
            word_initial: true,
            word_final: true,
        };
        let mut t = tok(0, 0);
        t.utterance_id = id.into();
        (track, vec![syl], vec![t])
    }

    #[test]
    fn assembly_drops_missing_layer() {
        let (t1, s1, a1) = utterance("u1", 0.3);
        let (t2, s2, _) = utterance("u2", 0.3);
        let syls = s1.into_iter().chain(s2).collect();
        let (c, r) = assemble_corpus(vec![t1, t2], syls, a1);
        assert_eq!(c.len(), 1);
        assert_eq!(r.drop_count(), 1);
        assert_eq!(r.dropped[0], ("u2".to_owned(), DropReason::MissingAnnotations));
    }

    #[test]
    fn assembly_single_consistent_utterance() {
        let (t, s, a) = utterance("u1", 0.3);
        let (c, r) = assemble_corpus(vec![t], s, a);
        assert_eq!((c.len(), r.drop_count()), (1, 0));
        assert_eq!(c.token_for("u1", 0).unwrap().pos_tag, "NN");
    }

    #[test]
    fn assembly_drops_span_past_track() {
        // syllable ends at 0.2 s but the track stops at 0.1 s
        let (t, s, a) = utterance("u1", 0.1);
        let (c, r) = assemble_corpus(vec![t], s, a);
        assert!(c.is_empty());
        assert_eq!(r.dropped[0].1, DropReason::SpanOutsideTrack { index: 0 });
    }
}
