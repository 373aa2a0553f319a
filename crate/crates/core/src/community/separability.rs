//! Intrinsic check of learned shape types: how well an unpruned CART tree
//! recovers the type from the contour vector itself, under stratified
//! k-fold cross-validation.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
enum Node<T> {
    Leaf(usize),
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
}

/// Gini-impurity classification tree grown until leaves are pure or
/// inseparable.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree<T> {
    nodes: Vec<Node<T>>,
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &k) in counts.iter().enumerate() {
        if k > counts[best] {
            best = c;
        }
    }
    best
}

impl<T: Scalar> DecisionTree<T> {
    pub fn fit<V: AsRef<[T]>>(x: &[V], y: &[usize]) -> Self {
        assert_eq!(x.len(), y.len());
        let n_classes = y.iter().max().map_or(1, |m| m + 1);
        let n_features = x.first().map_or(0, |r| r.as_ref().len());
        let mut nodes = vec![Node::Leaf(0)];
        let mut stack = vec![(0usize, (0..x.len()).collect::<Vec<usize>>())];
        let mut left_counts = vec![0usize; n_classes];
        let mut right_counts = vec![0usize; n_classes];

        while let Some((slot, mut idx)) = stack.pop() {
            let mut counts = vec![0usize; n_classes];
            for &i in &idx {
                counts[y[i]] += 1;
            }
            let leaf = Node::Leaf(majority(&counts));
            if idx.len() < 2 || counts.iter().filter(|&&c| c > 0).count() < 2 {
                nodes[slot] = leaf;
                continue;
            }
            let total = idx.len() as f64;
            let total_sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();

            // (impurity, feature, threshold)
            let mut best: Option<(f64, usize, T)> = None;
            for f in 0..n_features {
                idx.sort_by(|&a, &b| x[a].as_ref()[f].partial_cmp(&x[b].as_ref()[f]).expect("finite features"));
                left_counts.iter_mut().for_each(|c| *c = 0);
                right_counts.copy_from_slice(&counts);
                let (mut sq_l, mut sq_r) = (0.0, total_sq);
                for k in 0..idx.len() - 1 {
                    let c = y[idx[k]];
                    sq_l += (2 * left_counts[c] + 1) as f64;
                    sq_r -= (2 * right_counts[c] - 1) as f64;
                    left_counts[c] += 1;
                    right_counts[c] -= 1;
                    let (a, b) = (x[idx[k]].as_ref()[f], x[idx[k + 1]].as_ref()[f]);
                    if a == b {
                        continue;
                    }
                    let nl = (k + 1) as f64;
                    let nr = total - nl;
                    let impurity = (nl - sq_l / nl) + (nr - sq_r / nr);
                    if best.is_none_or(|(bi, _, _)| impurity < bi - 1e-12) {
                        let mid = (a + b) / T::lit(2.0);
                        let threshold = if mid < b { mid } else { a };
                        best = Some((impurity, f, threshold));
                    }
                }
            }
            let Some((_, feature, threshold)) = best else {
                nodes[slot] = leaf;
                continue;
            };
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i].as_ref()[feature] <= threshold);
            let (li, ri) = (nodes.len(), nodes.len() + 1);
            nodes.push(Node::Leaf(0));
            nodes.push(Node::Leaf(0));
            nodes[slot] = Node::Split {
                feature,
                threshold,
                left: li,
                right: ri,
            };
            stack.push((ri, r));
            stack.push((li, l));
        }
        DecisionTree { nodes }
    }

    pub fn predict(&self, x: &[T]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf(c) => return *c,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Fold index per sample; each class is shuffled and dealt round-robin.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(seed);
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut fold = vec![0; labels.len()];
    let mut offset = 0;
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        for (r, &i) in members.iter().enumerate() {
            fold[i] = (r + offset) % k;
        }
        offset += members.len();
    }
    fold
}

/// Mean stratified k-fold accuracy of a decision tree predicting `labels`
/// from `vectors`.
pub fn evaluate_separability<T: Scalar, V: AsRef<[T]>>(
    vectors: &[V],
    labels: &[usize],
    folds: usize,
    seed: u64,
) -> Result<f64> {
    if vectors.len() != labels.len() {
        return Err(Error::InvalidInput("vectors and labels differ in length".into()));
    }
    let mut distinct = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InvalidInput("separability needs at least two shape types".into()));
    }
    let folds = folds.max(2);
    let fold_of = stratified_folds(labels, folds, seed);
    let mut accs = Vec::new();
    for f in 0..folds {
        let (train, test): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| fold_of[i] != f);
        if test.is_empty() || train.is_empty() {
            continue;
        }
        let xs: Vec<&[T]> = train.iter().map(|&i| vectors[i].as_ref()).collect();
        let ys: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
        let tree = DecisionTree::fit(&xs, &ys);
        let hits = test.iter().filter(|&&i| tree.predict(vectors[i].as_ref()) == labels[i]).count();
        accs.push(hits as f64 / test.len() as f64);
    }
    Ok(accs.iter().sum::<f64>() / accs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn xor_is_learned() {
        let x = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = vec![0, 1, 1, 0];
        let t = DecisionTree::fit(&x, &y);
        for (xi, &yi) in x.iter().zip(&y) {
            assert_eq!(t.predict(xi), yi);
        }
    }

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<usize> = (0..100).map(|i| i % 4).collect();
        let f = stratified_folds(&labels, 5, 3);
        for fold in 0..5 {
            for c in 0..4 {
                let k = (0..100).filter(|&i| f[i] == fold && labels[i] == c).count();
                assert_eq!(k, 5);
            }
        }
    }

    fn blobs(n: usize, noise: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = crate::seed::rng(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let c = i % 3;
            x.push((0..10).map(|_| c as f64 * 2.0 + noise * (rng.random::<f64>() - 0.5)).collect());
            y.push(c);
        }
        (x, y)
    }

    #[test]
    fn separated_clusters_score_high() {
        let (x, y) = blobs(300, 0.0, 1);
        assert!(evaluate_separability(&x, &y, 5, 0).unwrap() >= 0.99);
        let (x, y) = blobs(300, 1.0, 2);
        assert!(evaluate_separability(&x, &y, 5, 0).unwrap() >= 0.99);
    }

    #[test]
    fn permuted_labels_are_at_chance() {
        let (x, mut y) = blobs(1500, 1.0, 5);
        y.shuffle(&mut crate::seed::rng(77));
        let acc = evaluate_separability(&x, &y, 5, 1).unwrap();
        assert!((acc - 1.0 / 3.0).abs() <= 0.05, "{acc}");
    }

    #[test]
    fn f32_tree() {
        let x = vec![vec![0.0_f32], vec![0.1], vec![5.0], vec![5.1]];
        let t = DecisionTree::fit(&x, &[0, 0, 1, 1]);
        assert_eq!(t.predict(&[4.0]), 1);
        assert_eq!(t.node_count(), 3);
    }
}
