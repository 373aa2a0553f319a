use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use toneshape::features::{
    collapse_tagset, default_pos_coarse_map, raw_feature_names, FeatureMatrix, FeatureSchema, FeatureVector,
    PhonologicalFlags, TagKind,
};
use toneshape::predict::{
    aggregate_report, permute_labels, run_experiment, train_linear_svm, ExperimentConfig,
    FeatureSet, SvmConfig,
};
use toneshape::seed::rng;
use toneshape::{ToneCategory, ToneContext};

fn blobs(n_per: usize, centers: &[[f64; 2]], sd: f64, seed: u64) -> (FeatureMatrix<f64>, Vec<usize>) {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, sd).unwrap();
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (c, ctr) in centers.iter().enumerate() {
        for _ in 0..n_per {
            data.push(ctr[0] + noise.sample(&mut r));
            data.push(ctr[1] + noise.sample(&mut r));
            labels.push(c);
        }
    }
    let cols = vec!["x".to_string(), "y".to_string()];
    (FeatureMatrix::new(cols.clone(), cols, data).unwrap(), labels)
}

#[test]
fn separable_blobs_are_fit_exactly() {
    let (x, y) = blobs(100, &[[-5.0, -5.0], [5.0, 5.0]], 1.0, 3);
    let m = train_linear_svm(&x, &y, &SvmConfig::default()).unwrap();
    assert_eq!(m.accuracy(&x, &y), 1.0);
    assert_eq!(m.weights.len(), 2);
    assert_eq!(m.weights[0].len(), 2);
}

#[test]
fn duplicated_column_splits_its_weight() {
    let xs = [-2.0, -1.0, 1.0, 2.0, -2.0, -1.0, 1.0, 2.0];
    let y: Vec<usize> = xs.iter().map(|&v| usize::from(v > 0.0)).collect();
    let one = FeatureMatrix::new(vec!["a".into()], vec!["a".into()], xs.to_vec()).unwrap();
    let dup_data: Vec<f64> = xs.iter().flat_map(|&v| [v, v]).collect();
    let two = FeatureMatrix::new(vec!["a".into(), "b".into()], vec!["a".into(), "b".into()], dup_data).unwrap();
    let cfg = SvmConfig::default();
    let m1 = train_linear_svm(&one, &y, &cfg).unwrap();
    let m2 = train_linear_svm(&two, &y, &cfg).unwrap();
    for c in 0..2 {
        let single = m1.weights[c][0];
        let pair = m2.weights[c][0] + m2.weights[c][1];
        assert!((single - pair).abs() < 1e-2, "class {c}: {single} vs {pair}");
        assert!((m2.weights[c][0] - m2.weights[c][1]).abs() < 1e-2);
    }
}

#[test]
fn non_finite_input_is_rejected() {
    let x = FeatureMatrix::new(vec!["a".into()], vec!["a".into()], vec![0.0, f64::INFINITY]).unwrap();
    assert!(train_linear_svm(&x, &[0, 1], &SvmConfig::default()).is_err());
}

#[test]
fn training_is_deterministic() {
    let (x, y) = blobs(60, &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 0.8, 9);
    let cfg = SvmConfig {
        seed: 5,
        ..Default::default()
    };
    assert_eq!(train_linear_svm(&x, &y, &cfg).unwrap(), train_linear_svm(&x, &y, &cfg).unwrap());
}

fn schema() -> FeatureSchema {
    let pos: BTreeMap<String, usize> = [("NN".to_string(), 50), ("VV".to_string(), 50)].into();
    let dep: BTreeMap<String, usize> = [("nsubj".to_string(), 50), ("dobj".to_string(), 50)].into();
    FeatureSchema {
        n: 1,
        pos: collapse_tagset(&pos, 5, TagKind::Pos(&default_pos_coarse_map())),
        dep: collapse_tagset(&dep, 5, TagKind::Dependency),
        phoneme_table_hash: String::new(),
        feature_names: raw_feature_names(1),
    }
}

/// Random feature vectors; when `driven`, the label is the quantile bucket of start_pitch.
fn dataset(size: usize, d: usize, driven: bool, seed: u64) -> (Vec<FeatureVector<f64>>, Vec<usize>) {
    let mut r = rng(seed);
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    for i in 0..size {
        let start: f64 = r.random_range(-2.0..2.0);
        let label = if driven {
            (((start + 2.0) / 4.0 * d as f64) as usize).min(d - 1)
        } else {
            r.random_range(0..d)
        };
        vectors.push(FeatureVector {
            instance_id: i as u64,
            pos_tags: vec![if r.random_bool(0.5) { "NOUN" } else { "VERB" }.into()],
            dep_funcs: vec![if r.random_bool(0.5) { "nsubj" } else { "dobj" }.into()],
            tok_bound: vec![false],
            is_entity: r.random_bool(0.3),
            is_singleton: r.random_bool(0.5),
            phonology: vec![PhonologicalFlags {
                nasal: r.random_bool(0.5),
                high: r.random_bool(0.5),
                ..Default::default()
            }],
            sent_position: r.random_range(0.0..1.0),
            start_pitch: start,
            end_pitch: r.random_range(-2.0..2.0),
            prev_tone: ToneContext::Boundary,
            next_tone: ToneContext::Boundary,
        });
        labels.push(label);
    }
    (vectors, labels)
}

fn cat() -> ToneCategory {
    "2".parse().unwrap()
}

#[test]
fn mle_is_exactly_one_over_d() {
    let (v, y) = dataset(400, 4, false, 1);
    let cfg = ExperimentConfig::default().with_feature_set(FeatureSet::Mle);
    let r = run_experiment(&schema(), &cat(), &v, &y, &cfg).unwrap();
    assert_eq!(r.d, 4);
    assert_eq!(r.test_accuracy, 0.25);
}

#[test]
fn independent_labels_score_near_chance() {
    let d = 3;
    let mut accs = Vec::new();
    for s in 0..5 {
        let (v, y) = dataset(900, d, false, 100 + s);
        let cfg = ExperimentConfig {
            seed: s,
            ..Default::default()
        };
        accs.push(run_experiment(&schema(), &cat(), &v, &y, &cfg).unwrap().test_accuracy);
    }
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    assert!((mean - 1.0 / d as f64).abs() <= 0.1, "mean accuracy {mean}");
}

#[test]
fn random_set_equals_data_on_permuted_labels() {
    let (v, y) = dataset(600, 3, true, 4);
    let cfg = ExperimentConfig {
        seed: 11,
        ..Default::default()
    };
    let random = run_experiment(&schema(), &cat(), &v, &y, &cfg.with_feature_set(FeatureSet::Random)).unwrap();
    let permuted = permute_labels(&y, &cfg);
    let data = run_experiment(&schema(), &cat(), &v, &permuted, &cfg).unwrap();
    assert_eq!(random.test_accuracy, data.test_accuracy);
    assert_eq!(random.d, data.d);
    let mut a = y.clone();
    let mut b = permuted.clone();
    a.sort_unstable();
    b.sort_unstable();
    assert_eq!(a, b);
}

#[test]
fn start_pitch_drives_and_ranks_first() {
    let (v, y) = dataset(800, 2, true, 8);
    let cfg = ExperimentConfig::default();
    let data = run_experiment(&schema(), &cat(), &v, &y, &cfg).unwrap();
    assert!(data.test_accuracy >= 0.5 + 0.15, "accuracy {}", data.test_accuracy);
    let imp = data.importance.as_ref().unwrap();
    assert_eq!(imp.ranked()[0].0, "start_pitch");
    let total: f64 = imp.features.iter().map(|f| f.1).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(imp.columns.iter().all(|c| c.1 >= 0.0));

    let again = run_experiment(&schema(), &cat(), &v, &y, &cfg).unwrap();
    assert_eq!(data, again);

    let no_pitch = run_experiment(&schema(), &cat(), &v, &y, &cfg.with_feature_set(FeatureSet::NoPitch)).unwrap();
    let dfp = run_experiment(&schema(), &cat(), &v, &y, &cfg.with_feature_set(FeatureSet::Dfp)).unwrap();
    assert!(dfp.test_accuracy > no_pitch.test_accuracy);
    let report = aggregate_report(&[data, no_pitch.clone(), dfp.clone()]);
    assert_eq!(report.deltas.len(), 0);
    assert_eq!(report.accuracy_for(1, FeatureSet::Dfp).unwrap().count, 1);
}

#[test]
fn feature_set_names_round_trip() {
    for fs in FeatureSet::ALL {
        assert_eq!(fs.name().parse::<FeatureSet>().unwrap(), fs);
    }
    assert!(FeatureSet::Dfp.keeps("start_pitch") && !FeatureSet::Dfp.keeps("pos_tag_1"));
    assert!(!FeatureSet::NoSyn.keeps("dep_func_2") && FeatureSet::NoSyn.keeps("tok_bound_2"));
    assert!(!FeatureSet::NoNtone.keeps("next_tone"));
    assert!(!FeatureSet::NoPitch.keeps("end_pitch") && FeatureSet::NoPitch.keeps("sent_position"));
}
