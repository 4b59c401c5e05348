//! Vertex classification: classifiers, stratified k-fold cross-validation and reports.

mod folds;
mod knn;
mod lda;
#[cfg(test)]
mod tests;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use folds::{stratified_folds, Fold};
pub use knn::knn_predict;
pub use lda::{lda_fit, lda_predict, LdaModel, RIDGE};

use crate::encoder::{encode, Embedding, EncoderWeights, Variant};
use crate::error::{GeeError, Result};
use crate::graph::{EdgeList, LabelVector};
use crate::registry::Registry;

/// A classifier trained on embedding rows and applied to held-out rows.
pub trait Classifier: Send + Sync {
    fn name(&self) -> &'static str;
    /// Predicted 1-based classes for the rows of `test`.
    fn fit_predict(&self, train: &Embedding, labels: &[u32], k: usize, test: &Embedding) -> Result<Vec<u32>>;
}

pub struct Lda;

impl Classifier for Lda {
    fn name(&self) -> &'static str {
        "lda"
    }

    fn fit_predict(&self, train: &Embedding, labels: &[u32], k: usize, test: &Embedding) -> Result<Vec<u32>> {
        let model = lda_fit(train, labels, k)?;
        Ok(test.rows().map(|r| model.predict(r)).collect())
    }
}

pub struct Knn {
    pub k: usize,
}

impl Classifier for Knn {
    fn name(&self) -> &'static str {
        "knn5"
    }

    fn fit_predict(&self, train: &Embedding, labels: &[u32], _k: usize, test: &Embedding) -> Result<Vec<u32>> {
        test.rows().map(|r| knn_predict(train, labels, r, self.k)).collect()
    }
}

/// Classifiers by name: `lda` and `knn5`.
pub fn classifier_registry() -> Registry<dyn Classifier> {
    let mut reg: Registry<dyn Classifier> = Registry::new("classifier");
    reg.register("lda", Box::new(Lda)).register("knn5", Box::new(Knn { k: 5 }));
    reg
}

/// Encodes with the fold's test labels hidden.
pub fn fold_embedding(
    edges: &EdgeList,
    labels: &LabelVector,
    fold: &Fold,
    variant: Variant,
) -> Result<(Embedding, EncoderWeights)> {
    encode(edges, &labels.masked(&fold.test), variant)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub per_fold: Vec<f64>,
    pub mean_error: f64,
    /// Sample standard deviation of the per-fold errors.
    pub std_error: f64,
}

fn fold_error(
    edges: &EdgeList,
    labels: &LabelVector,
    fold: &Fold,
    classifier: &dyn Classifier,
    variant: Variant,
) -> Result<f64> {
    let (z, _) = fold_embedding(edges, labels, fold, variant)?;
    let train_labels: Vec<u32> = fold.train.iter().map(|&i| labels.get(i)).collect();
    let predicted = classifier.fit_predict(
        &z.select_rows(&fold.train),
        &train_labels,
        labels.k(),
        &z.select_rows(&fold.test),
    )?;
    let wrong = fold.test.iter().zip(&predicted).filter(|(&i, &p)| labels.get(i) != p).count();
    Ok(wrong as f64 / fold.test.len() as f64)
}

/// Mean misclassification rate over stratified folds. Folds run in parallel;
/// the result does not depend on scheduling.
pub fn kfold_error(
    edges: &EdgeList,
    labels: &LabelVector,
    folds: usize,
    classifier: &dyn Classifier,
    variant: Variant,
    seed: u64,
) -> Result<CvOutcome> {
    if edges.n() != labels.len() {
        return Err(GeeError::Domain(format!(
            "edgelist has {} vertices but label vector has {} entries",
            edges.n(),
            labels.len()
        )));
    }
    let splits = stratified_folds(labels, folds, seed)?;
    kfold_error_with_folds(edges, labels, &splits, classifier, variant)
}

/// Cross-validation over caller-supplied folds.
pub fn kfold_error_with_folds(
    edges: &EdgeList,
    labels: &LabelVector,
    splits: &[Fold],
    classifier: &dyn Classifier,
    variant: Variant,
) -> Result<CvOutcome> {
    let per_fold = splits
        .par_iter()
        .map(|f| fold_error(edges, labels, f, classifier, variant))
        .collect::<Result<Vec<f64>>>()?;
    let m = per_fold.len() as f64;
    let mean_error = per_fold.iter().sum::<f64>() / m;
    let std_error = (per_fold.iter().map(|e| (e - mean_error).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    Ok(CvOutcome { per_fold, mean_error, std_error })
}

/// Error of always predicting the most frequent known class.
pub fn chance_error(labels: &LabelVector) -> f64 {
    let mut counts = vec![0usize; labels.k() + 1];
    for &y in labels.as_slice() {
        counts[y as usize] += 1;
    }
    let known: usize = counts[1..].iter().sum();
    if known == 0 {
        return 0.0;
    }
    1.0 - *counts[1..].iter().max().unwrap() as f64 / known as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub dataset: String,
    pub variant: Variant,
    pub classifier: String,
    pub folds: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub per_fold: Vec<f64>,
    pub chance_error: f64,
    pub wall_time_ms: f64,
}

/// Runs cross-validation for one named classifier and packages the report.
pub fn classification_report(
    dataset: &str,
    edges: &EdgeList,
    labels: &LabelVector,
    folds: usize,
    classifier: &str,
    variant: Variant,
    seed: u64,
) -> Result<ClassificationReport> {
    let registry = classifier_registry();
    let clf = registry.get(classifier)?;
    let start = Instant::now();
    let cv = kfold_error(edges, labels, folds, clf, variant, seed)?;
    Ok(ClassificationReport {
        dataset: dataset.to_string(),
        variant,
        classifier: clf.name().to_string(),
        folds,
        mean_error: cv.mean_error,
        std_error: cv.std_error,
        per_fold: cv.per_fold,
        chance_error: chance_error(labels),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Lowest mean error among reports.
pub fn best_error(reports: &[ClassificationReport]) -> Option<f64> {
    reports.iter().map(|r| r.mean_error).min_by(f64::total_cmp)
}
