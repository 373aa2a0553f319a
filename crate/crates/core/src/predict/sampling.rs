use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};

use crate::error::{Error, Result};
use crate::seed;

/// Smallest class size a category needs to be evaluated.
pub const MIN_MINORITY_CLASS: usize = 20;

fn by_class(labels: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        m.entry(l).or_default().push(i);
    }
    m
}

/// Randomly downsamples every class to the minority size. Returns the kept
/// row indices in ascending order.
pub fn balance_classes(labels: &[usize], min_class: usize, seed: u64) -> Result<Vec<usize>> {
    let classes = by_class(labels);
    if classes.len() < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 classes, got {}", classes.len())));
    }
    let minority = classes.values().map(Vec::len).min().unwrap_or(0);
    if minority < min_class {
        return Err(Error::MinorityTooSmall {
            size: minority,
            floor: min_class,
        });
    }
    let mut rng = seed::rng(seed);
    let mut kept = Vec::with_capacity(minority * classes.len());
    for rows in classes.values() {
        if rows.len() == minority {
            kept.extend_from_slice(rows);
        } else {
            kept.extend(index::sample(&mut rng, rows.len(), minority).iter().map(|k| rows[k]));
        }
    }
    kept.sort_unstable();
    Ok(kept)
}

/// Splits `rows` into (train, test) with each class contributing
/// `round((1 - train_ratio) * size)` test rows, at least one when the class has two or more.
pub fn stratified_split(rows: &[usize], labels: &[usize], train_ratio: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &r in rows {
        classes.entry(labels[r]).or_default().push(r);
    }
    let mut rng = seed::rng(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for mut members in classes.into_values() {
        members.shuffle(&mut rng);
        let size = members.len();
        let mut n_test = ((1.0 - train_ratio) * size as f64).round() as usize;
        if size >= 2 {
            n_test = n_test.clamp(1, size - 1);
        } else {
            n_test = 0;
        }
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}
