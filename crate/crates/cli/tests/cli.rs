use std::path::Path;
use std::process::{Command, Output};

use toneshape::synth::SynthSpec;

fn toneshape(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toneshape"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn write_spec(dir: &Path, utterances: usize) -> String {
    let spec = SynthSpec {
        utterances,
        ..Default::default()
    };
    let p = dir.join("spec.toml");
    std::fs::write(&p, toml::to_string(&spec).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn missing_spec_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = toneshape(&["synth", "--seed", "1", "--spec", "/nonexistent/spec.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_seed_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = toneshape(&["synth"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("corpus").exists());
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "seed = 1\nbogus = 3\n").unwrap();
    let out = toneshape(&["cluster", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_corpus_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(tmp.path().join("corpus")).unwrap();
    let out = toneshape(&["cluster", "--seed", "1"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn predict_without_labels_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), 200);
    assert!(toneshape(&["synth", "--seed", "1", "--spec", &spec], tmp.path()).status.success());
    let out = toneshape(&["predict", "--seed", "1"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_without_results_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = toneshape(&["report", "--seed", "1"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synth_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), 150);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        assert!(toneshape(&["synth", "--seed", "9", "--spec", &spec], d).status.success());
    }
    for f in ["f0.jsonl", "segmentation.tsv", "annotations.tsv", "ground_truth.csv"] {
        let fa = std::fs::read(a.join("corpus").join(f)).unwrap_or_else(|_| panic!("{f} written"));
        assert_eq!(fa, std::fs::read(b.join("corpus").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn mle_rows_equal_inverse_class_count() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), 1500);
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "seed = 5\nngram_orders = [1]\nfeature_sets = [\"data\", \"mle\"]\n").unwrap();
    let c = cfg.to_str().unwrap();
    for cmd in [&["synth", "--spec", &spec][..], &["cluster"], &["predict"], &["report"]] {
        let mut args = cmd.to_vec();
        args.extend(["--config", c]);
        let out = toneshape(&args, tmp.path());
        assert!(out.status.success(), "{cmd:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let results = std::fs::read_to_string(tmp.path().join("predict/results.csv")).unwrap();
    let mut lines = results.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (cat, fs, acc, d) = (col("category"), col("feature_set"), col("test_accuracy"), col("d"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(!rows.is_empty());
    let mut per_cat = std::collections::BTreeMap::new();
    for r in &rows {
        *per_cat.entry(r[cat]).or_insert(0) += 1;
        if r[fs] == "mle" {
            let d: f64 = r[d].parse().unwrap();
            assert_eq!(r[acc].parse::<f64>().unwrap(), 1.0 / d);
        }
    }
    assert!(per_cat.values().all(|&k| k == 2), "{per_cat:?}");
    assert!(tmp.path().join("report/summary.json").exists());
}
