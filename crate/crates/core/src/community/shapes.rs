use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::louvain::Partition;
use crate::error::{Error, Result};
use crate::preprocess::NgramDataset;
use crate::scalar::Scalar;
use crate::tone::ToneCategory;

/// Communities smaller than this are treated as outliers.
pub const DEFAULT_PRUNE_THRESHOLD: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrunedPartition {
    /// Shape type per node, `None` when the node's community was pruned.
    pub labels: Vec<Option<usize>>,
    /// Member count per surviving type.
    pub sizes: Vec<usize>,
    pub threshold: usize,
}

impl PrunedPartition {
    pub fn type_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn pruned_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }
}

/// Marks members of communities with fewer than `t` nodes as pruned and
/// renumbers the survivors by decreasing size.
pub fn prune_small(partition: &Partition, t: usize) -> Result<PrunedPartition> {
    if t == 0 {
        return Err(Error::InvalidInput("prune threshold must be at least 1".into()));
    }
    let sizes = partition.sizes();
    let mut keep: Vec<usize> = (0..sizes.len()).filter(|&c| sizes[c] >= t).collect();
    if keep.is_empty() {
        return Err(Error::NoSurvivingShapeTypes { threshold: t });
    }
    keep.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let mut new_id = vec![None; sizes.len()];
    for (i, &c) in keep.iter().enumerate() {
        new_id[c] = Some(i);
    }
    Ok(PrunedPartition {
        labels: partition.assignment.iter().map(|&c| new_id[c]).collect(),
        sizes: keep.iter().map(|&c| sizes[c]).collect(),
        threshold: t,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ShapeType<T> {
    pub type_id: usize,
    pub centroid: Vec<T>,
    pub member_count: usize,
    /// Per-sample population standard deviation of the members.
    pub dispersion: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ShapeTypeSet<T> {
    pub category: ToneCategory,
    pub types: Vec<ShapeType<T>>,
    /// Shape type per instance id; `None` for pruned instances.
    #[serde(skip)]
    pub labels: BTreeMap<u64, Option<usize>>,
}

impl<T: Scalar> ShapeTypeSet<T> {
    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    /// `(instance index in dataset, type id)` for every labelled instance.
    pub fn labelled_indices(&self, dataset: &NgramDataset<T>) -> Vec<(usize, usize)> {
        dataset
            .instances
            .iter()
            .enumerate()
            .filter_map(|(i, inst)| self.labels.get(&inst.instance_id).copied().flatten().map(|t| (i, t)))
            .collect()
    }
}

/// Centroid and per-sample spread of each surviving community.
pub fn shape_types<T: Scalar>(dataset: &NgramDataset<T>, pruned: &PrunedPartition) -> Result<ShapeTypeSet<T>> {
    if pruned.labels.len() != dataset.len() {
        return Err(Error::InvalidInput(format!(
            "partition covers {} nodes but dataset has {} instances",
            pruned.labels.len(),
            dataset.len()
        )));
    }
    if pruned.type_count() == 0 {
        return Err(Error::NoSurvivingShapeTypes {
            threshold: pruned.threshold,
        });
    }
    let len = dataset.instances.first().map_or(0, |i| i.f0_vector.len());
    let k = pruned.type_count();
    let mut sum = vec![vec![T::zero(); len]; k];
    let mut count = vec![0usize; k];
    for (inst, label) in dataset.instances.iter().zip(&pruned.labels) {
        if let Some(t) = *label {
            count[t] += 1;
            for (s, &x) in sum[t].iter_mut().zip(&inst.f0_vector) {
                *s += x;
            }
        }
    }
    let centroids: Vec<Vec<T>> = sum
        .into_iter()
        .zip(&count)
        .map(|(s, &c)| s.into_iter().map(|x| x / T::from_usize_lossy(c)).collect())
        .collect();
    let mut sq = vec![vec![T::zero(); len]; k];
    for (inst, label) in dataset.instances.iter().zip(&pruned.labels) {
        if let Some(t) = *label {
            for ((s, &x), &m) in sq[t].iter_mut().zip(&inst.f0_vector).zip(&centroids[t]) {
                *s += (x - m) * (x - m);
            }
        }
    }
    let types = centroids
        .into_iter()
        .zip(sq)
        .enumerate()
        .map(|(type_id, (centroid, sq))| ShapeType {
            type_id,
            member_count: count[type_id],
            dispersion: sq.into_iter().map(|s| (s / T::from_usize_lossy(count[type_id])).sqrt()).collect(),
            centroid,
        })
        .collect();
    let labels = dataset
        .instances
        .iter()
        .zip(&pruned.labels)
        .map(|(i, l)| (i.instance_id, *l))
        .collect();
    Ok(ShapeTypeSet {
        category: dataset.category.clone(),
        types,
        labels,
    })
}

/// `instance_id,type_id` rows; pruned instances get type `-1`.
pub fn write_labels_csv<W: Write>(mut w: W, labels: &BTreeMap<u64, Option<usize>>) -> std::io::Result<()> {
    writeln!(w, "instance_id,type_id")?;
    for (id, t) in labels {
        match t {
            Some(t) => writeln!(w, "{id},{t}")?,
            None => writeln!(w, "{id},-1")?,
        }
    }
    Ok(())
}

pub fn read_labels_csv<R: BufRead>(r: R) -> Result<BTreeMap<u64, Option<usize>>> {
    let mut out = BTreeMap::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("instance_id") {
            continue;
        }
        let bad = || Error::parse("labels", i + 1, format!("bad label row {line:?}"));
        let (id, t) = line.split_once(',').ok_or_else(bad)?;
        let id: u64 = id.trim().parse().map_err(|_| bad())?;
        let t: i64 = t.trim().parse().map_err(|_| bad())?;
        out.insert(id, usize::try_from(t).ok());
    }
    Ok(out)
}
