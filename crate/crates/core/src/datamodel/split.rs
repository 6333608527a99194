use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datamodel::dataset::Dataset;
use crate::datamodel::labels::Label;
use crate::error::{Error, Result};

/// Partitions instance indices into `k` stratified folds.
///
/// Each class is shuffled and dealt round-robin across the folds; the deal
/// for the second class continues where the first stopped, so fold sizes
/// differ by at most one overall and per class. Indices inside a fold are
/// sorted.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0usize;
    for class in [Label::Hit, Label::NonHit] {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == class)
            .map(|(i, _)| i)
            .collect();
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                class: class.to_string(),
                count: members.len(),
                folds: k,
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Indices of every instance not in `fold`, ascending.
pub fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut mask = vec![true; n];
    for &i in fold {
        mask[i] = false;
    }
    (0..n).filter(|&i| mask[i]).collect()
}

/// Chronological split: the earliest `floor(n * train_fraction)` instances
/// train, the rest test. Ties on date keep their original order.
pub fn out_of_time_split(dataset: &Dataset, train_fraction: f64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let (train, test) = out_of_time_indices(dataset, train_fraction);
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

pub fn out_of_time_indices(dataset: &Dataset, train_fraction: f64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.sort_by_key(|&i| dataset.dates()[i]);
    let n_train = (dataset.len() as f64 * train_fraction).floor() as usize;
    let test = order.split_off(n_train);
    (order, test)
}
