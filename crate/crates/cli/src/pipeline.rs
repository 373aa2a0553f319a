use std::collections::BTreeMap;

use log::{info, warn};
use rayon::prelude::*;
use toneshape::community::{
    evaluate_separability, prune_small, shape_types, tune_and_partition, PrunedPartition, TuneConfig, TunedPartition,
};
use toneshape::contour_net::{
    pairwise_distances, select_threshold, SparseDistances, ThresholdConfig, ThresholdDiagnostics,
};
use toneshape::features::{extract_features, FeatureSchema, FeatureVector, PhonemeTable, SchemaConfig};
use toneshape::ingest::Corpus;
use toneshape::predict::{run_experiment, CategoryResult, ExperimentConfig, FeatureSet};
use toneshape::preprocess::{build_ngram_datasets, normalize_corpus};
use toneshape::seed::derive_seed;
use toneshape::{Error, NgramDataset, Result, ShapeTypeSet, ToneCategory};

use crate::config::Params;

/// Everything the clustering stage learns about one category.
#[derive(Debug, Clone)]
pub struct CategoryClusters {
    pub dataset: NgramDataset,
    pub threshold: f64,
    pub edges: usize,
    pub diagnostics: Vec<ThresholdDiagnostics<f64>>,
    pub tuned: TunedPartition,
    pub pruned: PrunedPartition,
    pub shapes: ShapeTypeSet,
    /// Mean cross-validated decision-tree accuracy; `None` with a single type.
    pub separability: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum CategoryOutcome {
    Clustered(Box<CategoryClusters>),
    Skipped { category: ToneCategory, instances: usize, reason: String },
}

impl CategoryOutcome {
    pub fn category(&self) -> &ToneCategory {
        match self {
            CategoryOutcome::Clustered(c) => &c.dataset.category,
            CategoryOutcome::Skipped { category, .. } => category,
        }
    }

    pub fn clustered(&self) -> Option<&CategoryClusters> {
        match self {
            CategoryOutcome::Clustered(c) => Some(c),
            CategoryOutcome::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ClusterRun {
    pub outcomes: BTreeMap<usize, Vec<CategoryOutcome>>,
    /// Categories below the minimum size, per n.
    pub sparse: BTreeMap<usize, Vec<(ToneCategory, usize)>>,
}

fn category_seed(params: &Params, stage: &str, n: usize, category: &ToneCategory) -> u64 {
    derive_seed(params.seed, &[stage, &n.to_string(), &category.to_string()])
}

/// Threshold selection, tuned Louvain, pruning, shape types and separability for one dataset.
pub fn cluster_dataset(dataset: NgramDataset, params: &Params) -> Result<CategoryClusters> {
    let n = dataset.order();
    let cat = dataset.category.clone();
    let phis = params.thresholds_for(n);
    let tcfg = ThresholdConfig {
        seed: category_seed(params, "threshold", n, &cat),
        replicates: params.null_replicates,
    };
    let selection = {
        let vectors = dataset.vectors();
        if dataset.len() <= params.dense_limit {
            select_threshold(&pairwise_distances(&vectors), &phis, &tcfg)?
        } else {
            let cap = phis.iter().copied().fold(0.0, f64::max);
            select_threshold(&SparseDistances::from_vectors(&vectors, cap), &phis, &tcfg)?
        }
    };
    let tuned = tune_and_partition(
        &selection.graph,
        &TuneConfig {
            resolutions: params.resolutions.clone(),
            prune_threshold: params.prune_threshold,
            seed: category_seed(params, "louvain", n, &cat),
        },
    );
    let pruned = prune_small(&tuned.partition, params.prune_threshold)?;
    let shapes = shape_types(&dataset, &pruned)?;
    let separability = if shapes.type_count() >= 2 {
        let idx = shapes.labelled_indices(&dataset);
        let xs: Vec<&[f64]> = idx.iter().map(|&(i, _)| dataset.instances[i].f0_vector.as_slice()).collect();
        let ys: Vec<usize> = idx.iter().map(|&(_, t)| t).collect();
        Some(evaluate_separability(
            &xs,
            &ys,
            params.separability_folds,
            category_seed(params, "separability", n, &cat),
        )?)
    } else {
        None
    };
    info!(
        "n={n} {cat}: {} instances, phi={}, {} edges, gamma={}, {} shape types",
        dataset.len(),
        selection.threshold,
        selection.graph.edge_count(),
        tuned.resolution,
        shapes.type_count()
    );
    Ok(CategoryClusters {
        threshold: selection.threshold,
        edges: selection.graph.edge_count(),
        diagnostics: selection.diagnostics,
        tuned,
        pruned,
        shapes,
        separability,
        dataset,
    })
}

/// Errors that mean "this category yields no shape types" rather than a broken run.
fn is_category_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::NoConnectiveThreshold | Error::NoSurvivingShapeTypes { .. } | Error::InvalidInput(_)
    )
}

pub fn cluster_corpus(corpus: &Corpus, params: &Params) -> Result<ClusterRun> {
    if corpus.is_empty() {
        return Err(Error::Validation("corpus has no usable utterances".into()));
    }
    let normalized = normalize_corpus(corpus);
    for (spk, why) in &normalized.speakers.excluded {
        warn!("speaker {spk} excluded: {why:?}");
    }
    let mut run = ClusterRun::default();
    for &n in &params.ngram_orders {
        let build = build_ngram_datasets::<f64>(corpus, &normalized, n, params.min_category_size)?;
        for (cat, size) in &build.sparse {
            log::debug!("n={n} {cat}: {size} instances, below minimum {}", params.min_category_size);
        }
        let mut outcomes = Vec::new();
        for (cat, ds) in build.datasets {
            let instances = ds.len();
            match cluster_dataset(ds, params) {
                Ok(c) => outcomes.push(CategoryOutcome::Clustered(Box::new(c))),
                Err(e) if is_category_failure(&e) => {
                    warn!("n={n} {cat}: skipped: {e}");
                    outcomes.push(CategoryOutcome::Skipped {
                        category: cat,
                        instances,
                        reason: e.to_string(),
                    });
                }
                Err(e) => return Err(e),
            }
        }
        run.outcomes.insert(n, outcomes);
        run.sparse.insert(n, build.sparse);
    }
    Ok(run)
}

/// A clustered category as seen by the prediction stage.
#[derive(Debug, Clone)]
pub struct LabelledCategory {
    pub dataset: NgramDataset,
    pub labels: BTreeMap<u64, Option<usize>>,
}

#[derive(Debug, Clone, Default)]
pub struct PredictRun {
    pub results: Vec<CategoryResult>,
    pub schemas: BTreeMap<usize, FeatureSchema>,
    pub skipped: Vec<(usize, ToneCategory, String)>,
}

pub fn schema_config(params: &Params) -> SchemaConfig {
    SchemaConfig {
        min_count: params.tag_min_count,
        pos_coarse: params.pos_coarse_map.clone(),
    }
}

/// Feature vectors and labels of the labelled instances of one category.
pub fn labelled_features(
    cat: &LabelledCategory,
    corpus: &Corpus,
    schema: &FeatureSchema,
    phonemes: &PhonemeTable,
) -> Result<(Vec<FeatureVector<f64>>, Vec<usize>)> {
    let picked: Vec<(usize, usize)> = cat
        .dataset
        .instances
        .iter()
        .enumerate()
        .filter_map(|(i, inst)| cat.labels.get(&inst.instance_id).copied().flatten().map(|t| (i, t)))
        .collect();
    let vectors = picked
        .par_iter()
        .map(|&(i, _)| extract_features(&cat.dataset.instances[i], corpus, schema, phonemes))
        .collect::<Result<Vec<_>>>()?;
    Ok((vectors, picked.into_iter().map(|(_, t)| t).collect()))
}

/// Runs every configured feature set on every category. Balance and split
/// seeds depend on (n, category) only, so feature sets are compared on the same rows.
pub fn predict_categories(
    corpus: &Corpus,
    categories: &BTreeMap<usize, Vec<LabelledCategory>>,
    params: &Params,
    phonemes: &PhonemeTable,
) -> Result<PredictRun> {
    let mut run = PredictRun::default();
    let scfg = schema_config(params);
    let mut jobs: Vec<(usize, usize, FeatureSet)> = Vec::new();
    let mut prepared: BTreeMap<(usize, usize), (Vec<FeatureVector<f64>>, Vec<usize>)> = BTreeMap::new();
    for (&n, cats) in categories {
        let schema = FeatureSchema::from_corpus(n, corpus, &scfg, phonemes);
        for (k, cat) in cats.iter().enumerate() {
            let (vectors, labels) = labelled_features(cat, corpus, &schema, phonemes)?;
            jobs.extend(params.feature_sets.iter().map(|&fs| (n, k, fs)));
            prepared.insert((n, k), (vectors, labels));
        }
        run.schemas.insert(n, schema);
    }
    let outcomes: Vec<(usize, usize, Result<CategoryResult>)> = jobs
        .par_iter()
        .map(|&(n, k, fs)| {
            let cat = &categories[&n][k].dataset.category;
            let (vectors, labels) = &prepared[&(n, k)];
            let cfg = ExperimentConfig {
                feature_set: fs,
                split_ratio: params.split_ratio,
                seed: category_seed(params, "predict", n, cat),
                svm_cost: params.svm_cost,
                ..Default::default()
            };
            (n, k, run_experiment(&run.schemas[&n], cat, vectors, labels, &cfg))
        })
        .collect();
    let mut reported: std::collections::BTreeSet<(usize, usize)> = Default::default();
    for (n, k, r) in outcomes {
        match r {
            Ok(res) => run.results.push(res),
            Err(e @ (Error::MinorityTooSmall { .. } | Error::InvalidInput(_))) => {
                if reported.insert((n, k)) {
                    let cat = categories[&n][k].dataset.category.clone();
                    warn!("n={n} {cat}: prediction skipped: {e}");
                    run.skipped.push((n, cat, e.to_string()));
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(run)
}

/// Synthetic-corpus helper: clusters then predicts in memory.
pub fn labelled_from_run(run: &ClusterRun) -> BTreeMap<usize, Vec<LabelledCategory>> {
    run.outcomes
        .iter()
        .map(|(&n, outs)| {
            (
                n,
                outs.iter()
                    .filter_map(CategoryOutcome::clustered)
                    .map(|c| LabelledCategory {
                        dataset: c.dataset.clone(),
                        labels: c.shapes.labels.clone(),
                    })
                    .collect(),
            )
        })
        .collect()
}
