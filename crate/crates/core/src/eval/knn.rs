//! Brute-force k-nearest-neighbour voting.

use crate::encoder::Embedding;
use crate::error::{GeeError, Result};

/// Majority vote of the `k` nearest training rows under Euclidean distance.
///
/// Equal distances order by training index; a tied vote goes to the lowest class.
pub fn knn_predict(train: &Embedding, labels: &[u32], row: &[f64], k: usize) -> Result<u32> {
    if train.n() == 0 {
        return Err(GeeError::Domain("k-NN needs a non-empty training set".into()));
    }
    if train.n() != labels.len() {
        return Err(GeeError::Domain(format!("{} rows but {} labels", train.n(), labels.len())));
    }
    if k == 0 || k > train.n() {
        return Err(GeeError::Domain(format!("k = {k} with {} training rows", train.n())));
    }
    let mut dist: Vec<(f64, usize)> = train
        .rows()
        .enumerate()
        .map(|(i, t)| (t.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum(), i))
        .collect();
    let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < dist.len() {
        dist.select_nth_unstable_by(k - 1, order);
        dist.truncate(k);
    }
    let classes = labels.iter().copied().max().unwrap_or(0) as usize;
    let mut votes = vec![0usize; classes + 1];
    for &(_, i) in &dist {
        votes[labels[i] as usize] += 1;
    }
    let mut best = 0;
    for c in 1..votes.len() {
        if votes[c] > votes[best] || best == 0 {
            best = c;
        }
    }
    Ok(best as u32)
}
