use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::svm::LinearModel;
use crate::features::{domain_of, FeatureDomain};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    /// Per encoded column, in column order.
    pub columns: Vec<(String, f64)>,
    /// Per raw feature, one-hot blocks summed, in first-appearance order.
    pub features: Vec<(String, f64)>,
    pub domains: BTreeMap<FeatureDomain, f64>,
}

impl Importance {
    /// Raw features sorted by importance, highest first; ties keep feature order.
    pub fn ranked(&self) -> Vec<(String, f64)> {
        let mut v = self.features.clone();
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v
    }
}

/// Absolute weights summed over classes and normalized to sum 1. A model
/// with all-zero weights spreads importance uniformly.
pub fn feature_importance<T: Scalar>(model: &LinearModel<T>, parents: &[String]) -> Importance {
    let d = model.columns.len();
    let mut raw = vec![0.0f64; d];
    for w in &model.weights {
        for (acc, v) in raw.iter_mut().zip(w) {
            *acc += v.as_f64().abs();
        }
    }
    let total: f64 = raw.iter().sum();
    let norm: Vec<f64> = if total > 0.0 {
        raw.iter().map(|v| v / total).collect()
    } else {
        vec![1.0 / d.max(1) as f64; d]
    };

    let mut features: Vec<(String, f64)> = Vec::new();
    let mut slot: BTreeMap<&str, usize> = BTreeMap::new();
    let mut domains: BTreeMap<FeatureDomain, f64> = FeatureDomain::ALL.iter().map(|&g| (g, 0.0)).collect();
    for (p, &v) in parents.iter().zip(&norm) {
        let k = *slot.entry(p.as_str()).or_insert_with(|| {
            features.push((p.clone(), 0.0));
            features.len() - 1
        });
        features[k].1 += v;
        *domains.entry(domain_of(p)).or_default() += v;
    }
    Importance {
        columns: model.columns.iter().cloned().zip(norm).collect(),
        features,
        domains,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(w: Vec<Vec<f64>>, cols: &[&str]) -> LinearModel<f64> {
        LinearModel {
            classes: (0..w.len()).collect(),
            bias: vec![0.0; w.len()],
            weights: w,
            columns: cols.iter().map(|c| c.to_string()).collect(),
            epochs: vec![],
        }
    }

    #[test]
    fn single_nonzero_weight_gets_everything() {
        let m = model(vec![vec![0.0, -3.0, 0.0], vec![0.0, 0.0, 0.0]], &["a", "b", "c"]);
        let parents: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let imp = feature_importance(&m, &parents);
        assert_eq!(imp.features[1], ("b".to_string(), 1.0));
        assert_eq!(imp.features[0].1, 0.0);
    }

    #[test]
    fn equal_weights_split_evenly() {
        let m = model(vec![vec![2.0, -2.0]], &["start_pitch", "end_pitch"]);
        let parents = m.columns.clone();
        let imp = feature_importance(&m, &parents);
        assert_eq!(imp.features[0].1, 0.5);
        assert_eq!(imp.features[1].1, 0.5);
        assert_eq!(imp.domains[&FeatureDomain::Other], 1.0);
    }

    #[test]
    fn one_hot_blocks_fold_into_parent() {
        let m = model(vec![vec![1.0, 1.0, 2.0]], &["pos_tag_1=NOUN", "pos_tag_1=VERB", "is_entity"]);
        let parents: Vec<String> = ["pos_tag_1", "pos_tag_1", "is_entity"].iter().map(|s| s.to_string()).collect();
        let imp = feature_importance(&m, &parents);
        assert_eq!(imp.features, vec![("pos_tag_1".into(), 0.5), ("is_entity".into(), 0.5)]);
        assert_eq!(imp.domains[&FeatureDomain::Syntactic], 0.5);
        assert_eq!(imp.domains[&FeatureDomain::Semantic], 0.5);
    }
}
