use std::collections::BTreeMap;

use toneshape::features::{
    collapse_tagset, default_pos_coarse_map, raw_feature_names, FeatureEncoder, FeatureSchema, FeatureVector,
    PhonologicalFlags, RawValue, TagKind,
};
use toneshape::{Tone, ToneContext};

fn schema(n: usize) -> FeatureSchema {
    let pos: BTreeMap<String, usize> = [("NN", 10), ("VV", 10), ("P", 6)].iter().map(|(t, c)| (t.to_string(), *c)).collect();
    let dep: BTreeMap<String, usize> =
        [("nsubj", 10), ("dobj", 9), ("advmod:loc", 2)].iter().map(|(t, c)| (t.to_string(), *c)).collect();
    FeatureSchema {
        n,
        pos: collapse_tagset(&pos, 5, TagKind::Pos(&default_pos_coarse_map())),
        dep: collapse_tagset(&dep, 5, TagKind::Dependency),
        phoneme_table_hash: String::new(),
        feature_names: raw_feature_names(n),
    }
}

fn vector(id: u64, pos: &str, dep: &str, sent: f64, prev: ToneContext) -> FeatureVector<f64> {
    FeatureVector {
        instance_id: id,
        pos_tags: vec![pos.into()],
        dep_funcs: vec![dep.into()],
        tok_bound: vec![false],
        is_entity: id % 2 == 0,
        is_singleton: false,
        phonology: vec![PhonologicalFlags {
            nasal: true,
            ..Default::default()
        }],
        sent_position: sent,
        start_pitch: id as f64 * 0.3,
        end_pitch: -(id as f64),
        prev_tone: prev,
        next_tone: ToneContext::Boundary,
    }
}

fn sample() -> Vec<FeatureVector<f64>> {
    vec![
        vector(0, "NOUN", "nsubj", 0.0, ToneContext::Boundary),
        vector(1, "VERB", "dobj", 0.5, ToneContext::Tone(Tone::new(3).unwrap())),
        vector(2, "OTHER", "OTHER", 1.0, ToneContext::Tone(Tone::new(0).unwrap())),
    ]
}

#[test]
fn tone_context_has_six_columns() {
    let s = schema(1);
    let enc = FeatureEncoder::fit(&s, &sample(), &[0, 1, 2]).unwrap();
    let m = enc.transform(&sample()).unwrap();
    let prev = m.parents.iter().filter(|p| *p == "prev_tone").count();
    assert_eq!(prev, 6);
    assert_eq!(m.n_rows(), 3);
    assert_eq!(m.n_cols(), enc.width());
}

#[test]
fn all_false_boolean_column_is_kept() {
    let s = schema(1);
    let enc = FeatureEncoder::fit(&s, &sample(), &[0, 1, 2]).unwrap();
    let m = enc.transform(&sample()).unwrap();
    let j = m.columns.iter().position(|c| c == "is_singleton").unwrap();
    assert!(m.rows().all(|r| r[j] == 0.0));
}

#[test]
fn standardized_on_train_rows_only() {
    let s = schema(1);
    let mut v = sample();
    v.push(vector(3, "NOUN", "nsubj", 0.9, ToneContext::Boundary));
    let enc = FeatureEncoder::fit(&s, &v, &[0, 1, 2]).unwrap();
    let m = enc.transform(&v).unwrap();
    let j = m.columns.iter().position(|c| c == "sent_position").unwrap();
    let train_mean: f64 = (0..3).map(|i| m.row(i)[j]).sum::<f64>() / 3.0;
    assert!(train_mean.abs() < 1e-12);
    let train_var: f64 = (0..3).map(|i| m.row(i)[j].powi(2)).sum::<f64>() / 3.0;
    assert!((train_var - 1.0).abs() < 1e-12);
    // 0.9 is standardized with the train statistics (mean 0.5, population std sqrt(1/6)).
    assert!((m.row(3)[j] - 0.4 / (1.0f64 / 6.0).sqrt()).abs() < 1e-12);
}

#[test]
fn decoding_recovers_categoricals() {
    let s = schema(1);
    let v = sample();
    let enc = FeatureEncoder::fit(&s, &v, &[0, 1, 2]).unwrap();
    let m = enc.transform(&v).unwrap();
    for (i, fv) in v.iter().enumerate() {
        let decoded = enc.decode(m.row(i)).unwrap();
        for (a, b) in decoded.iter().zip(fv.raw_values()) {
            match (a, b) {
                (RawValue::Numeric(x), RawValue::Numeric(y)) => assert!((x - y).abs() < 1e-12),
                (a, b) => assert_eq!(*a, b),
            }
        }
    }
}

#[test]
fn non_finite_numeric_is_rejected() {
    let s = schema(1);
    let mut v = sample();
    v[1].start_pitch = f64::NAN;
    let err = FeatureEncoder::fit(&s, &v, &[0, 1, 2]).unwrap_err();
    assert!(err.to_string().contains("start_pitch"));
}

#[test]
fn ablation_selection_by_parent() {
    let s = schema(1);
    let enc = FeatureEncoder::fit(&s, &sample(), &[0, 1, 2]).unwrap();
    let m = enc.transform(&sample()).unwrap();
    let dfp = m.select_parents(|p| p == "start_pitch" || p == "end_pitch");
    assert_eq!(dfp.columns, vec!["start_pitch", "end_pitch"]);
    assert_eq!(dfp.n_rows(), 3);
}
