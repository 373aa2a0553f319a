use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;
use serde_json::json;
use toneshape::community::{read_labels_csv, write_labels_csv};
use toneshape::contour_net::write_diagnostics_csv;
use toneshape::ingest::{load_corpus, write_annotations, write_f0_tracks, write_segmentation, Corpus, CorpusPaths};
use toneshape::predict::{
    aggregate_report, read_results_csv, write_deltas_csv, write_importance_csv, write_results_csv, FiveNumber,
};
use toneshape::preprocess::{read_dataset, write_dataset};
use toneshape::synth::{generate_corpus, GroundTruth, SynthSpec};
use toneshape::{Error, Result, ToneCategory};

use crate::config::Config;
use crate::pipeline::{cluster_corpus, predict_categories, CategoryOutcome, LabelledCategory};

pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";

/// `# toneshape config_hash=... seed=...`, the first line of every text output.
pub fn meta_line(cfg: &Config) -> String {
    format!("# toneshape config_hash={} seed={}", cfg.params.hash(), cfg.params.seed)
}

fn meta_json(cfg: &Config) -> serde_json::Value {
    json!({
        "tool": "toneshape",
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": cfg.params.hash(),
        "seed": cfg.params.seed,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes a text file whose first line is the metadata comment.
fn write_text(cfg: &Config, path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{}", meta_line(cfg))?;
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_json<S: Serialize>(cfg: &Config, path: &Path, body: &S) -> Result<()> {
    let mut value = serde_json::to_value(body)?;
    if let serde_json::Value::Object(m) = &mut value {
        m.insert("meta".into(), meta_json(cfg));
    }
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn require(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{what} not found: {}", path.display())))
    }
}

pub fn load_spec(path: &Path) -> Result<SynthSpec> {
    require(path, "synth spec")?;
    let text = fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
}

pub fn write_corpus(cfg: &Config, corpus: &Corpus, dir: &Path) -> Result<CorpusPaths> {
    let paths = CorpusPaths::in_dir(dir);
    write_text(cfg, &paths.f0, |w| write_f0_tracks(w, corpus.tracks.values()))?;
    write_text(cfg, &paths.segmentation, |w| write_segmentation(w, corpus.syllables.values().flatten()))?;
    write_text(cfg, &paths.annotations, |w| write_annotations(w, corpus.annotations.values().flatten()))?;
    Ok(paths)
}

/// Generates a synthetic corpus into the corpus directory. The global seed
/// replaces the spec's own seed.
pub fn cmd_synth(cfg: &Config, spec_path: Option<&Path>) -> Result<(Corpus, GroundTruth)> {
    let mut spec = match spec_path {
        Some(p) => load_spec(p)?,
        None => SynthSpec::default(),
    };
    spec.seed = cfg.params.seed;
    let (corpus, truth) = generate_corpus(&spec, &cfg.phonemes)?;
    write_corpus(cfg, &corpus, &cfg.corpus_dir)?;
    write_text(cfg, &cfg.corpus_dir.join(GROUND_TRUTH_FILE), |w| truth.write_csv(w))?;
    info!(
        "wrote {} utterances, {} syllables to {}",
        corpus.len(),
        corpus.syllable_count(),
        cfg.corpus_dir.display()
    );
    Ok((corpus, truth))
}

pub fn load_input_corpus(cfg: &Config) -> Result<Corpus> {
    let paths = CorpusPaths::in_dir(&cfg.corpus_dir);
    require(&paths.f0, "f0 file")?;
    require(&paths.segmentation, "segmentation file")?;
    require(&paths.annotations, "annotation file")?;
    let (corpus, report) = load_corpus(&paths)?;
    for (utt, why) in &report.dropped {
        log::warn!("utterance {utt} dropped: {why:?}");
    }
    if corpus.is_empty() {
        return Err(Error::Validation(format!("corpus in {} is empty", cfg.corpus_dir.display())));
    }
    Ok(corpus)
}

fn cluster_dir(cfg: &Config, n: usize) -> PathBuf {
    cfg.out.join("cluster").join(format!("n{n}"))
}

pub fn dataset_path(cfg: &Config, n: usize, cat: &ToneCategory) -> PathBuf {
    cluster_dir(cfg, n).join("datasets").join(format!("{}.jsonl", cat.file_stem()))
}

pub fn labels_path(cfg: &Config, n: usize, cat: &ToneCategory) -> PathBuf {
    cluster_dir(cfg, n).join("labels").join(format!("{}.csv", cat.file_stem()))
}

pub fn type_counts_path(cfg: &Config) -> PathBuf {
    cfg.out.join("cluster").join("type_counts.csv")
}

const TYPE_COUNTS_HEADER: &str =
    "n,category,instances,threshold,edges,resolution,communities,shape_types,pruned_instances,separability,status";

/// Runs ingest through community detection for every configured n and category.
pub fn cmd_cluster(cfg: &Config) -> Result<crate::pipeline::ClusterRun> {
    let corpus = load_input_corpus(cfg)?;
    let run = cluster_corpus(&corpus, &cfg.params)?;
    let mut histogram: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut rows = Vec::new();
    for (&n, outcomes) in &run.outcomes {
        for o in outcomes {
            match o {
                CategoryOutcome::Clustered(c) => {
                    let cat = &c.dataset.category;
                    let stem = cat.file_stem();
                    let dir = cluster_dir(cfg, n);
                    write_text(cfg, &dataset_path(cfg, n, cat), |w| write_dataset(&mut *w, &c.dataset))?;
                    write_text(cfg, &labels_path(cfg, n, cat), |w| Ok(write_labels_csv(w, &c.shapes.labels)?))?;
                    write_text(cfg, &dir.join("thresholds").join(format!("{stem}.csv")), |w| {
                        Ok(write_diagnostics_csv(w, &c.diagnostics)?)
                    })?;
                    write_json(
                        cfg,
                        &dir.join("shape_types").join(format!("{stem}.json")),
                        &json!({
                            "category": cat,
                            "n": n,
                            "instances": c.dataset.len(),
                            "threshold": c.threshold,
                            "edges": c.edges,
                            "resolution": c.tuned.resolution,
                            "modularity": c.tuned.partition.modularity,
                            "fallback": c.tuned.fallback,
                            "sweep": c.tuned.sweep,
                            "pruned_instances": c.pruned.pruned_count(),
                            "separability": c.separability,
                            "types": c.shapes.types,
                        }),
                    )?;
                    *histogram.entry((n, c.shapes.type_count())).or_default() += 1;
                    rows.push(format!(
                        "{n},{cat},{},{},{},{},{},{},{},{},ok",
                        c.dataset.len(),
                        c.threshold,
                        c.edges,
                        c.tuned.resolution,
                        c.tuned.partition.community_count(),
                        c.shapes.type_count(),
                        c.pruned.pruned_count(),
                        c.separability.map_or(String::new(), |s| s.to_string()),
                    ));
                }
                CategoryOutcome::Skipped { category, instances, .. } => {
                    *histogram.entry((n, 0)).or_default() += 1;
                    rows.push(format!("{n},{category},{instances},,,,,0,,,skipped"));
                }
            }
        }
    }
    write_text(cfg, &type_counts_path(cfg), |w| {
        writeln!(w, "{TYPE_COUNTS_HEADER}")?;
        for r in &rows {
            writeln!(w, "{r}")?;
        }
        Ok(())
    })?;
    write_text(cfg, &cfg.out.join("cluster").join("histogram.csv"), |w| {
        writeln!(w, "n,shape_types,categories")?;
        for ((n, k), c) in &histogram {
            writeln!(w, "{n},{k},{c}")?;
        }
        Ok(())
    })?;
    Ok(run)
}

/// Categories listed as clustered in `type_counts.csv`.
pub fn clustered_categories(cfg: &Config) -> Result<Vec<(usize, ToneCategory)>> {
    let path = type_counts_path(cfg);
    require(&path, "cluster summary (run `cluster` first)")?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(&path)?).lines().enumerate() {
        let line = line?;
        if line.starts_with('#') || line == TYPE_COUNTS_HEADER || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(Error::Validation(format!("{}:{}: expected 11 columns", path.display(), i + 1)));
        }
        if f[10] != "ok" {
            continue;
        }
        let n = f[0]
            .parse()
            .map_err(|_| Error::Validation(format!("{}:{}: bad n", path.display(), i + 1)))?;
        out.push((n, f[1].parse()?));
    }
    Ok(out)
}

pub fn results_path(cfg: &Config) -> PathBuf {
    cfg.out.join("predict").join("results.csv")
}

pub fn importance_path(cfg: &Config) -> PathBuf {
    cfg.out.join("predict").join("importance.csv")
}

/// Feature extraction and all configured prediction experiments.
pub fn cmd_predict(cfg: &Config) -> Result<crate::pipeline::PredictRun> {
    let listed = clustered_categories(cfg)?;
    let corpus = load_input_corpus(cfg)?;
    let mut cats: BTreeMap<usize, Vec<LabelledCategory>> = BTreeMap::new();
    for (n, cat) in listed {
        if !cfg.params.ngram_orders.contains(&n) {
            continue;
        }
        let dp = dataset_path(cfg, n, &cat);
        let lp = labels_path(cfg, n, &cat);
        require(&dp, "dataset file")?;
        require(&lp, "labels file")?;
        let dataset = read_dataset(&dp)?;
        let labels = read_labels_csv(BufReader::new(File::open(&lp)?))?;
        cats.entry(n).or_default().push(LabelledCategory { dataset, labels });
    }
    let run = predict_categories(&corpus, &cats, &cfg.params, &cfg.phonemes)?;
    let report = aggregate_report(&run.results);
    let dir = cfg.out.join("predict");
    write_text(cfg, &results_path(cfg), |w| write_results_csv(w, &run.results))?;
    write_text(cfg, &importance_path(cfg), |w| write_importance_csv(w, &run.results))?;
    write_text(cfg, &dir.join("deltas.csv"), |w| write_deltas_csv(w, &report.deltas))?;
    write_text(cfg, &dir.join("skipped.csv"), |w| {
        writeln!(w, "n,category,reason")?;
        for (n, c, why) in &run.skipped {
            writeln!(w, "{n},{c},\"{}\"", why.replace('"', "'"))?;
        }
        Ok(())
    })?;
    for (n, schema) in &run.schemas {
        write_json(cfg, &dir.join(format!("schema_n{n}.json")), schema)?;
    }
    Ok(run)
}

/// Summary JSON: accuracy five-number summaries, weight distributions and deltas.
pub fn cmd_report(cfg: &Config) -> Result<toneshape::predict::Report> {
    let rp = results_path(cfg);
    require(&rp, "prediction results (run `predict` first)")?;
    let ip = importance_path(cfg);
    let results = read_results_csv(&rp, ip.is_file().then_some(ip.as_path()))?;
    if results.is_empty() {
        return Err(Error::Validation(format!("{} has no results", rp.display())));
    }
    let report = aggregate_report(&results);
    let deltas: Vec<f64> = report.deltas.iter().map(|d| d.delta).collect();
    let positive = deltas.iter().filter(|d| **d > 0.0).count();
    write_json(
        cfg,
        &cfg.out.join("report").join("summary.json"),
        &json!({
            "accuracy": report.accuracy,
            "domain_weights": report.domain_weights,
            "feature_weights": report.feature_weights,
            "deltas": {
                "count": deltas.len(),
                "positive_fraction": if deltas.is_empty() { None } else { Some(positive as f64 / deltas.len() as f64) },
                "summary": FiveNumber::of(&deltas),
                "per_category": report.deltas,
            },
        }),
    )?;
    Ok(report)
}
