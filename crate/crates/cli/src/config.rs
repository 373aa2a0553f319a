use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toneshape::community::{DEFAULT_PRUNE_THRESHOLD, DEFAULT_RESOLUTIONS};
use toneshape::contour_net::default_thresholds;
use toneshape::features::{default_pos_coarse_map, CoarseMap, PhonemeTable};
use toneshape::predict::FeatureSet;
use toneshape::preprocess::DEFAULT_MIN_CATEGORY_SIZE;
use toneshape::{Error, Result};

/// Config file contents. Every field is optional; missing ones take defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub corpus_dir: Option<PathBuf>,
    pub ngram_orders: Option<Vec<usize>>,
    pub thresholds: Option<BTreeMap<String, Vec<f64>>>,
    pub min_category_size: Option<usize>,
    pub prune_threshold: Option<usize>,
    pub resolutions: Option<Vec<f64>>,
    pub null_replicates: Option<usize>,
    pub separability_folds: Option<usize>,
    pub dense_limit: Option<usize>,
    pub svm_cost: Option<f64>,
    pub split_ratio: Option<f64>,
    pub feature_sets: Option<Vec<FeatureSet>>,
    pub tag_min_count: Option<usize>,
    pub pos_coarse_map: Option<CoarseMap>,
    pub phoneme_table: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
    }
}

/// Parameters that determine outputs. Hashed into every output header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub seed: u64,
    pub ngram_orders: Vec<usize>,
    pub thresholds: BTreeMap<usize, Vec<f64>>,
    pub min_category_size: usize,
    pub prune_threshold: usize,
    pub resolutions: Vec<f64>,
    pub null_replicates: usize,
    pub separability_folds: usize,
    pub dense_limit: usize,
    pub svm_cost: f64,
    pub split_ratio: f64,
    pub feature_sets: Vec<FeatureSet>,
    pub tag_min_count: usize,
    pub pos_coarse_map: CoarseMap,
    pub phoneme_table_hash: String,
}

impl Params {
    pub fn with_seed(seed: u64) -> Self {
        Params {
            seed,
            ngram_orders: vec![1, 2, 3],
            thresholds: (1..=3).map(|n| (n, default_thresholds(n))).collect(),
            min_category_size: DEFAULT_MIN_CATEGORY_SIZE,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
            resolutions: DEFAULT_RESOLUTIONS.to_vec(),
            null_replicates: 1,
            separability_folds: 5,
            dense_limit: 8000,
            svm_cost: 1.0,
            split_ratio: 0.9,
            feature_sets: FeatureSet::ALL.to_vec(),
            tag_min_count: 5,
            pos_coarse_map: default_pos_coarse_map(),
            phoneme_table_hash: PhonemeTable::default().hash().to_owned(),
        }
    }

    pub fn thresholds_for(&self, n: usize) -> Vec<f64> {
        self.thresholds.get(&n).cloned().unwrap_or_else(|| default_thresholds(n))
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("params serialize");
        Sha256::digest(&json).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.ngram_orders.is_empty() || self.ngram_orders.iter().any(|n| !(1..=3).contains(n)) {
            return Err(Error::Validation(format!("ngram_orders must be a non-empty subset of 1..=3, got {:?}", self.ngram_orders)));
        }
        for (n, phis) in &self.thresholds {
            if phis.is_empty() || phis.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
                return Err(Error::Validation(format!("thresholds for n={n} must be positive")));
            }
        }
        if self.resolutions.is_empty() || self.resolutions.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Validation("resolutions must be positive".into()));
        }
        if self.prune_threshold == 0 || self.tag_min_count == 0 || self.null_replicates == 0 {
            return Err(Error::Validation("prune_threshold, tag_min_count and null_replicates must be at least 1".into()));
        }
        if !(self.svm_cost > 0.0) {
            return Err(Error::Validation("svm_cost must be positive".into()));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Validation("split_ratio must be in (0, 1)".into()));
        }
        if self.separability_folds < 2 {
            return Err(Error::Validation("separability_folds must be at least 2".into()));
        }
        Ok(())
    }
}

/// Fully resolved configuration for one invocation.
#[derive(Debug, Clone)]
pub struct Config {
    pub params: Params,
    pub out: PathBuf,
    pub corpus_dir: PathBuf,
    pub phonemes: PhonemeTable,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub corpus_dir: Option<PathBuf>,
}

impl Config {
    pub fn resolve(file: ConfigFile, over: Overrides) -> Result<Self> {
        let seed = over
            .seed
            .or(file.seed)
            .ok_or_else(|| Error::Validation("a seed is required (config `seed` or --seed)".into()))?;
        let phonemes = match &file.phoneme_table {
            Some(p) => PhonemeTable::load(p)
                .map_err(|e| Error::Validation(format!("phoneme table {}: {e}", p.display())))?,
            None => PhonemeTable::default(),
        };
        let mut params = Params::with_seed(seed);
        params.phoneme_table_hash = phonemes.hash().to_owned();
        if let Some(v) = file.ngram_orders {
            params.ngram_orders = v;
        }
        if let Some(t) = file.thresholds {
            for (k, v) in t {
                let n: usize = k
                    .trim_start_matches('n')
                    .parse()
                    .map_err(|_| Error::Validation(format!("bad thresholds key {k:?}")))?;
                params.thresholds.insert(n, v);
            }
        }
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = file.$f { params.$f = v; })* };
        }
        take!(
            min_category_size,
            prune_threshold,
            resolutions,
            null_replicates,
            separability_folds,
            dense_limit,
            svm_cost,
            split_ratio,
            feature_sets,
            tag_min_count,
            pos_coarse_map
        );
        params.validate()?;
        let out = over.out.or(file.out).unwrap_or_else(|| PathBuf::from("out"));
        let corpus_dir = over.corpus_dir.or(file.corpus_dir).unwrap_or_else(|| out.join("corpus"));
        Ok(Config {
            params,
            out,
            corpus_dir,
            phonemes,
        })
    }
}
