use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::importance::{feature_importance, Importance};
use super::sampling::{balance_classes, stratified_split, MIN_MINORITY_CLASS};
use super::svm::{train_linear_svm, SvmConfig};
use crate::error::{Error, Result};
use crate::features::{FeatureEncoder, FeatureSchema, FeatureVector};
use crate::scalar::Scalar;
use crate::seed;
use crate::tone::ToneCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FeatureSet {
    Data,
    Dfp,
    NoSyn,
    NoNtone,
    NoPitch,
    Random,
    Mle,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 7] = [
        FeatureSet::Data,
        FeatureSet::Dfp,
        FeatureSet::NoSyn,
        FeatureSet::NoNtone,
        FeatureSet::NoPitch,
        FeatureSet::Random,
        FeatureSet::Mle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::Data => "data",
            FeatureSet::Dfp => "dfp",
            FeatureSet::NoSyn => "no_syn",
            FeatureSet::NoNtone => "no_Ntone",
            FeatureSet::NoPitch => "no_pitch",
            FeatureSet::Random => "random",
            FeatureSet::Mle => "mle",
        }
    }

    /// Whether columns derived from raw feature `parent` are used.
    pub fn keeps(self, parent: &str) -> bool {
        let pitch = parent == "start_pitch" || parent == "end_pitch";
        match self {
            FeatureSet::Data | FeatureSet::Random | FeatureSet::Mle => true,
            FeatureSet::Dfp => pitch,
            FeatureSet::NoSyn => !(parent.starts_with("pos_tag") || parent.starts_with("dep_func")),
            FeatureSet::NoNtone => parent != "prev_tone" && parent != "next_tone",
            FeatureSet::NoPitch => !pitch,
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureSet::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown feature set {s:?}")))
    }
}

impl TryFrom<String> for FeatureSet {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FeatureSet> for String {
    fn from(f: FeatureSet) -> String {
        f.name().to_owned()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub feature_set: FeatureSet,
    pub split_ratio: f64,
    pub seed: u64,
    pub svm_cost: f64,
    pub min_class_size: usize,
    pub tolerance: f64,
    pub max_epochs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            feature_set: FeatureSet::Data,
            split_ratio: 0.9,
            seed: 0,
            svm_cost: 1.0,
            min_class_size: MIN_MINORITY_CLASS,
            tolerance: 1e-4,
            max_epochs: 1000,
        }
    }
}

impl ExperimentConfig {
    pub fn with_feature_set(&self, feature_set: FeatureSet) -> Self {
        ExperimentConfig {
            feature_set,
            ..self.clone()
        }
    }

    fn sub_seed(&self, label: &str) -> u64 {
        seed::derive_seed(self.seed, &[label])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryResult {
    pub category: ToneCategory,
    pub n: usize,
    pub feature_set: FeatureSet,
    pub test_accuracy: f64,
    pub d: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub importance: Option<Importance>,
}

/// Shuffled copy of `labels` used by the `random` feature set. Class sizes are unchanged.
pub fn permute_labels(labels: &[usize], config: &ExperimentConfig) -> Vec<usize> {
    let mut out = labels.to_vec();
    out.shuffle(&mut seed::rng(config.sub_seed("permute")));
    out
}

/// Balances classes, splits 90/10 stratified, standardizes on the training
/// rows, trains and scores on the held-out rows. The balance and split depend
/// only on `config.seed`, so every feature set sees the same rows.
pub fn run_experiment<T: Scalar>(
    schema: &FeatureSchema,
    category: &ToneCategory,
    vectors: &[FeatureVector<T>],
    labels: &[usize],
    config: &ExperimentConfig,
) -> Result<CategoryResult> {
    if vectors.len() != labels.len() {
        return Err(Error::InvalidInput(format!("{} vectors but {} labels", vectors.len(), labels.len())));
    }
    if !(config.split_ratio > 0.0 && config.split_ratio < 1.0) {
        return Err(Error::InvalidInput(format!("split ratio must be in (0, 1), got {}", config.split_ratio)));
    }
    let permuted;
    let labels = if config.feature_set == FeatureSet::Random {
        permuted = permute_labels(labels, config);
        &permuted[..]
    } else {
        labels
    };
    let kept = balance_classes(labels, config.min_class_size, config.sub_seed("balance"))?;
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let d = classes.len();
    let (train, test) = stratified_split(&kept, labels, config.split_ratio, config.sub_seed("split"));

    let mut result = CategoryResult {
        category: category.clone(),
        n: schema.n,
        feature_set: config.feature_set,
        test_accuracy: 1.0 / d as f64,
        d,
        train_size: train.len(),
        test_size: test.len(),
        importance: None,
    };
    if config.feature_set == FeatureSet::Mle {
        return Ok(result);
    }

    let train_ids: std::collections::BTreeSet<u64> = train.iter().map(|&r| vectors[r].instance_id).collect();
    assert!(
        test.iter().all(|&r| !train_ids.contains(&vectors[r].instance_id)),
        "test instance leaked into training"
    );

    let encoder = FeatureEncoder::fit(schema, vectors, &train)?;
    let pick = |rows: &[usize]| -> Result<_> {
        let fv: Vec<FeatureVector<T>> = rows.iter().map(|&r| vectors[r].clone()).collect();
        Ok(encoder.transform(&fv)?.select_parents(|p| config.feature_set.keeps(p)))
    };
    let x_train = pick(&train)?;
    let x_test = pick(&test)?;
    let y_train: Vec<usize> = train.iter().map(|&r| labels[r]).collect();
    let y_test: Vec<usize> = test.iter().map(|&r| labels[r]).collect();

    let svm = SvmConfig {
        cost: config.svm_cost,
        tolerance: config.tolerance,
        max_epochs: config.max_epochs,
        seed: config.sub_seed("svm"),
    };
    let model = train_linear_svm(&x_train, &y_train, &svm)?;
    result.test_accuracy = model.accuracy(&x_test, &y_test);
    result.importance = Some(feature_importance(&model, &x_train.parents));
    Ok(result)
}
