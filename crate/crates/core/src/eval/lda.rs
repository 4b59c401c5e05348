//! Pooled-covariance linear discriminant analysis.

use nalgebra::{DMatrix, DVector};

use crate::encoder::Embedding;
use crate::error::{GeeError, Result};

/// Relative size of the ridge added to the pooled covariance.
pub const RIDGE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct LdaModel {
    /// `K × d` class means.
    pub means: Vec<Vec<f64>>,
    /// Regularised pooled covariance.
    pub covariance: DMatrix<f64>,
    pub priors: Vec<f64>,
    pub epsilon: f64,
    // S^-1 mu_k and the constant term of each discriminant
    coef: Vec<DVector<f64>>,
    offset: Vec<f64>,
}

/// Fits LDA on rows `x` with 1-based labels in `1..=k`.
pub fn lda_fit(x: &Embedding, labels: &[u32], k: usize) -> Result<LdaModel> {
    if x.n() != labels.len() {
        return Err(GeeError::Domain(format!("{} rows but {} labels", x.n(), labels.len())));
    }
    let d = x.k();
    let mut counts = vec![0usize; k];
    let mut means = vec![vec![0.0; d]; k];
    for (row, &y) in x.rows().zip(labels) {
        let c = (y as usize).checked_sub(1).filter(|&c| c < k).ok_or_else(|| {
            GeeError::Domain(format!("training label {y} outside 1..={k}"))
        })?;
        counts[c] += 1;
        for (m, v) in means[c].iter_mut().zip(row) {
            *m += v;
        }
    }
    if let Some(c) = counts.iter().position(|&m| m < 2) {
        return Err(GeeError::Domain(format!(
            "LDA needs at least 2 training samples per class; class {} has {}",
            c + 1,
            counts[c]
        )));
    }
    for (m, &cnt) in means.iter_mut().zip(&counts) {
        for v in m.iter_mut() {
            *v /= cnt as f64;
        }
    }

    let n = x.n();
    let mut s = DMatrix::<f64>::zeros(d, d);
    for (row, &y) in x.rows().zip(labels) {
        let m = &means[y as usize - 1];
        let dev = DVector::from_iterator(d, row.iter().zip(m).map(|(a, b)| a - b));
        s.ger(1.0, &dev, &dev, 1.0);
    }
    s /= (n - k).max(1) as f64;

    let trace = s.trace();
    let mut epsilon = if trace > 0.0 { RIDGE * trace / d as f64 } else { 1e-12 };
    let chol = loop {
        let mut reg = s.clone();
        for i in 0..d {
            reg[(i, i)] += epsilon;
        }
        if let Some(c) = reg.clone().cholesky() {
            s = reg;
            break c;
        }
        epsilon *= 10.0;
    };

    let priors: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let mut coef = Vec::with_capacity(k);
    let mut offset = Vec::with_capacity(k);
    for (m, p) in means.iter().zip(&priors) {
        let mu = DVector::from_column_slice(m);
        let a = chol.solve(&mu);
        offset.push(-0.5 * mu.dot(&a) + p.ln());
        coef.push(a);
    }
    Ok(LdaModel { means, covariance: s, priors, epsilon, coef, offset })
}

impl LdaModel {
    /// Discriminant scores, one per class.
    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(row);
        self.coef.iter().zip(&self.offset).map(|(a, b)| x.dot(a) + b).collect()
    }

    /// Class (1-based) with the largest score; ties go to the lowest class.
    pub fn predict(&self, row: &[f64]) -> u32 {
        let mut best = (0, f64::NEG_INFINITY);
        for (c, s) in self.scores(row).into_iter().enumerate() {
            if s > best.1 {
                best = (c, s);
            }
        }
        best.0 as u32 + 1
    }
}

pub fn lda_predict(model: &LdaModel, row: &[f64]) -> u32 {
    model.predict(row)
}
