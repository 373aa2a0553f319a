use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::experiment::{CategoryResult, FeatureSet};
use super::importance::Importance;
use crate::error::{Error, Result};
use crate::features::{domain_of, FeatureDomain};
use crate::tone::ToneCategory;

/// Minimum, quartiles and maximum; quartiles interpolate linearly between order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(FiveNumber {
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracySummary {
    pub n: usize,
    pub feature_set: FeatureSet,
    pub count: usize,
    pub summary: FiveNumber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSummary {
    pub n: usize,
    pub name: String,
    pub count: usize,
    pub summary: FiveNumber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryDelta {
    pub n: usize,
    pub category: ToneCategory,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub accuracy: Vec<AccuracySummary>,
    pub feature_weights: Vec<WeightSummary>,
    pub domain_weights: Vec<WeightSummary>,
    pub deltas: Vec<CategoryDelta>,
}

impl Report {
    pub fn accuracy_for(&self, n: usize, fs: FeatureSet) -> Option<&AccuracySummary> {
        self.accuracy.iter().find(|a| a.n == n && a.feature_set == fs)
    }
}

impl Importance {
    /// Rebuilds domain roll-ups from per-feature values.
    pub fn from_features(features: Vec<(String, f64)>) -> Self {
        let mut domains: BTreeMap<FeatureDomain, f64> = FeatureDomain::ALL.iter().map(|&g| (g, 0.0)).collect();
        for (f, v) in &features {
            *domains.entry(domain_of(f)).or_default() += v;
        }
        Importance {
            columns: Vec::new(),
            features,
            domains,
        }
    }
}

/// Accuracy distributions per (n, feature set), weight distributions over
/// the `data` runs, and per-category `no_syn − dfp` deltas.
pub fn aggregate_report(results: &[CategoryResult]) -> Report {
    let mut acc: BTreeMap<(usize, FeatureSet), Vec<f64>> = BTreeMap::new();
    let mut feat: BTreeMap<(usize, String), Vec<f64>> = BTreeMap::new();
    let mut dom: BTreeMap<(usize, FeatureDomain), Vec<f64>> = BTreeMap::new();
    let mut pair: BTreeMap<(usize, ToneCategory), (Option<f64>, Option<f64>)> = BTreeMap::new();
    for r in results {
        acc.entry((r.n, r.feature_set)).or_default().push(r.test_accuracy);
        if r.feature_set == FeatureSet::Data {
            if let Some(imp) = &r.importance {
                for (f, v) in &imp.features {
                    feat.entry((r.n, f.clone())).or_default().push(*v);
                }
                for (g, v) in &imp.domains {
                    dom.entry((r.n, *g)).or_default().push(*v);
                }
            }
        }
        let slot = pair.entry((r.n, r.category.clone())).or_default();
        match r.feature_set {
            FeatureSet::NoSyn => slot.0 = Some(r.test_accuracy),
            FeatureSet::Dfp => slot.1 = Some(r.test_accuracy),
            _ => {}
        }
    }
    let weights = |m: BTreeMap<(usize, String), Vec<f64>>| -> Vec<WeightSummary> {
        m.into_iter()
            .filter_map(|((n, name), v)| {
                FiveNumber::of(&v).map(|summary| WeightSummary {
                    n,
                    name,
                    count: v.len(),
                    summary,
                })
            })
            .collect()
    };
    Report {
        accuracy: acc
            .into_iter()
            .filter_map(|((n, feature_set), v)| {
                FiveNumber::of(&v).map(|summary| AccuracySummary {
                    n,
                    feature_set,
                    count: v.len(),
                    summary,
                })
            })
            .collect(),
        feature_weights: weights(feat),
        domain_weights: weights(dom.into_iter().map(|((n, g), v)| ((n, g.name().to_owned()), v)).collect()),
        deltas: pair
            .into_iter()
            .filter_map(|((n, category), (ns, dfp))| {
                Some(CategoryDelta {
                    n,
                    category,
                    delta: ns? - dfp?,
                })
            })
            .collect(),
    }
}

pub const RESULTS_HEADER: &str = "n,category,feature_set,d,test_accuracy";
pub const IMPORTANCE_HEADER: &str = "n,category,feature,importance";
pub const DELTAS_HEADER: &str = "n,category,delta_nosyn_dfp";

pub fn write_results_csv<W: Write>(mut w: W, results: &[CategoryResult]) -> Result<()> {
    writeln!(w, "{RESULTS_HEADER}")?;
    for r in results {
        writeln!(w, "{},{},{},{},{}", r.n, r.category, r.feature_set, r.d, r.test_accuracy)?;
    }
    Ok(())
}

/// Per-feature importance of the `data` runs.
pub fn write_importance_csv<W: Write>(mut w: W, results: &[CategoryResult]) -> Result<()> {
    writeln!(w, "{IMPORTANCE_HEADER}")?;
    for r in results.iter().filter(|r| r.feature_set == FeatureSet::Data) {
        if let Some(imp) = &r.importance {
            for (f, v) in &imp.features {
                writeln!(w, "{},{},{},{}", r.n, r.category, f, v)?;
            }
        }
    }
    Ok(())
}

pub fn write_deltas_csv<W: Write>(mut w: W, deltas: &[CategoryDelta]) -> Result<()> {
    writeln!(w, "{DELTAS_HEADER}")?;
    for d in deltas {
        writeln!(w, "{},{},{}", d.n, d.category, d.delta)?;
    }
    Ok(())
}

fn data_lines(path: &Path, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in f.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t == header {
            continue;
        }
        out.push((i + 1, t.split(',').map(str::to_owned).collect()));
    }
    Ok(out)
}

/// Reads a results CSV and, if given, the matching importance CSV.
pub fn read_results_csv(results: &Path, importance: Option<&Path>) -> Result<Vec<CategoryResult>> {
    let num = |path: &Path, line: usize, s: &str| -> Result<f64> {
        s.parse().map_err(|_| Error::parse(path, line, format!("bad number {s:?}")))
    };
    let mut imp: BTreeMap<(usize, String), Vec<(String, f64)>> = BTreeMap::new();
    if let Some(p) = importance {
        for (line, f) in data_lines(p, IMPORTANCE_HEADER)? {
            if f.len() != 4 {
                return Err(Error::parse(p, line, "expected 4 columns"));
            }
            let n = num(p, line, &f[0])? as usize;
            imp.entry((n, f[1].clone())).or_default().push((f[2].clone(), num(p, line, &f[3])?));
        }
    }
    let mut out = Vec::new();
    for (line, f) in data_lines(results, RESULTS_HEADER)? {
        if f.len() != 5 {
            return Err(Error::parse(results, line, "expected 5 columns"));
        }
        let n: usize = f[0].parse().map_err(|_| Error::parse(results, line, "bad n"))?;
        let category: ToneCategory = f[1].parse().map_err(|e: Error| Error::parse(results, line, e.to_string()))?;
        let feature_set: FeatureSet = f[2].parse().map_err(|e: Error| Error::parse(results, line, e.to_string()))?;
        let d: usize = f[3].parse().map_err(|_| Error::parse(results, line, "bad d"))?;
        let importance = if feature_set == FeatureSet::Data {
            imp.get(&(n, f[1].clone())).cloned().map(Importance::from_features)
        } else {
            None
        };
        out.push(CategoryResult {
            category,
            n,
            feature_set,
            test_accuracy: num(results, line, &f[4])?,
            d,
            train_size: 0,
            test_size: 0,
            importance,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_numbers() {
        let f = FiveNumber::of(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((f.min, f.q1, f.median, f.q3, f.max), (1.0, 2.0, 3.0, 4.0, 5.0));
        let one = FiveNumber::of(&[0.4]).unwrap();
        assert_eq!((one.min, one.median, one.max), (0.4, 0.4, 0.4));
        let even = FiveNumber::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(even.median, 2.5);
        assert_eq!(even.q1, 1.75);
    }
}
