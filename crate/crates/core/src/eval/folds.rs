use rand::seq::SliceRandom;

use crate::error::{GeeError, Result};
use crate::graph::LabelVector;
use crate::rng::{self, tag};

/// One cross-validation split of the labeled vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified folds over the vertices with known labels.
///
/// Each class is shuffled and dealt round-robin, continuing where the
/// previous class stopped so fold sizes differ by at most one.
pub fn stratified_folds(labels: &LabelVector, folds: usize, seed: u64) -> Result<Vec<Fold>> {
    if folds < 2 {
        return Err(GeeError::Config(format!("k-fold needs at least 2 folds, got {folds}")));
    }
    let mut by_class = vec![Vec::new(); labels.k()];
    for i in labels.known_indices() {
        by_class[labels.get(i) as usize - 1].push(i);
    }
    if let Some(c) = by_class.iter().position(|m| m.len() < folds) {
        return Err(GeeError::Config(format!(
            "class {} has {} labeled vertices, fewer than {folds} folds",
            c + 1,
            by_class[c].len()
        )));
    }
    let mut rng = rng::stream(seed, &[tag::FOLDS]);
    let mut assignment = vec![Vec::new(); folds];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignment[next].push(i);
            next = (next + 1) % folds;
        }
    }
    let labeled = labels.known_indices();
    Ok(assignment
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let train = labeled.iter().copied().filter(|i| test.binary_search(i).is_err()).collect();
            Fold { train, test }
        })
        .collect())
}
