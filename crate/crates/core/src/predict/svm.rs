use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::scalar::Scalar;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub cost: f64,
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            cost: 1.0,
            tolerance: 1e-4,
            max_epochs: 1000,
            seed: 0,
        }
    }
}

/// One-vs-rest linear classifier: one weight vector and bias per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LinearModel<T> {
    pub classes: Vec<usize>,
    pub weights: Vec<Vec<T>>,
    pub bias: Vec<T>,
    pub columns: Vec<String>,
    /// Epochs used per class before the stopping rule fired.
    pub epochs: Vec<usize>,
}

impl<T: Scalar> LinearModel<T> {
    pub fn scores(&self, row: &[T]) -> Vec<T> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, &b)| w.iter().zip(row).fold(b, |acc, (&wi, &xi)| acc + wi * xi))
            .collect()
    }

    /// Class with the highest score; ties go to the earlier class.
    pub fn predict(&self, row: &[T]) -> usize {
        let s = self.scores(row);
        let mut best = 0;
        for k in 1..s.len() {
            if s[k] > s[best] {
                best = k;
            }
        }
        self.classes[best]
    }

    pub fn accuracy(&self, x: &FeatureMatrix<T>, labels: &[usize]) -> f64 {
        if labels.is_empty() {
            return 0.0;
        }
        let hits = x.rows().zip(labels).filter(|(r, &l)| self.predict(r) == l).count();
        hits as f64 / labels.len() as f64
    }
}

/// L2-regularized hinge-loss binary SVM by dual coordinate descent. The bias
/// is an extra constant-1 feature and is regularized with the weights.
/// Returns (weights, bias, epochs).
fn train_binary(x: &[Vec<f64>], y: &[f64], cfg: &SvmConfig, seed: u64) -> (Vec<f64>, f64, usize) {
    let d = x.first().map_or(0, Vec::len);
    let c = cfg.cost;
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut alpha = vec![0.0; x.len()];
    let qd: Vec<f64> = x.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>() + 1.0).collect();
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut rng = seed::rng(seed);
    let mut epochs = 0;
    while epochs < cfg.max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for &i in &order {
            let xi = &x[i];
            let g = y[i] * (xi.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + b) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).clamp(0.0, c);
                let step = (alpha[i] - old) * y[i];
                for (wj, xj) in w.iter_mut().zip(xi) {
                    *wj += step * xj;
                }
                b += step;
            }
        }
        if pg_max - pg_min <= cfg.tolerance {
            break;
        }
    }
    (w, b, epochs)
}

/// Trains one binary classifier per class (class versus the rest).
pub fn train_linear_svm<T: Scalar>(x: &FeatureMatrix<T>, labels: &[usize], cfg: &SvmConfig) -> Result<LinearModel<T>> {
    if x.n_rows() != labels.len() {
        return Err(Error::InvalidInput(format!("{} rows but {} labels", x.n_rows(), labels.len())));
    }
    if !(cfg.cost > 0.0) {
        return Err(Error::InvalidInput(format!("svm cost must be positive, got {}", cfg.cost)));
    }
    x.check_finite()?;
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::InvalidInput("need at least 2 classes to train".into()));
    }
    let rows: Vec<Vec<f64>> = x.rows().map(|r| r.iter().map(|v| v.as_f64()).collect()).collect();
    let fits: Vec<(Vec<f64>, f64, usize)> = classes
        .par_iter()
        .map(|&c| {
            let y: Vec<f64> = labels.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
            let s = seed::derive_seed(cfg.seed, &["ovr", &c.to_string()]);
            train_binary(&rows, &y, cfg, s)
        })
        .collect();
    let mut model = LinearModel {
        classes,
        weights: Vec::with_capacity(fits.len()),
        bias: Vec::with_capacity(fits.len()),
        columns: x.columns.clone(),
        epochs: Vec::with_capacity(fits.len()),
    };
    for (w, b, e) in fits {
        model.weights.push(w.into_iter().map(T::lit).collect());
        model.bias.push(T::lit(b));
        model.epochs.push(e);
    }
    Ok(model)
}
