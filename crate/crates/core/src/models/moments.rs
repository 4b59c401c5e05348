//! Limiting mean and covariance of a vertex embedding.
//!
//! For a vertex of class `y`, `Diag(n)^{1/2} (Z_i - mu)` is asymptotically
//! `N(0, Sigma)` with diagonal `Sigma`:
//!
//! * SBM: `mu = B(y,:)`, `Sigma(k,k) = B(y,k)(1 - B(y,k))`;
//! * DC-SBM: `mu = theta_i B(y,:) .* T1`, `Sigma = theta_i^2 Diag(T2) Sigma_B`,
//!   with `T_t(k) = E[theta^t | class k]`;
//! * RDPG: `mu_k = E[X^T x_i | class k]`, `Sigma(k,k) = mu_k - mu_k^2`.

use serde::Serialize;

use super::dist::Dist;
use super::dot;
use crate::error::{GeeError, Result};

/// What is known about the vertex whose moments are requested.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VertexContext {
    /// 1-based class of the vertex.
    pub class: usize,
    pub theta: Option<f64>,
    pub latent: Option<Vec<f64>>,
}

impl VertexContext {
    pub fn class(class: usize) -> Self {
        VertexContext { class, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentOracle {
    pub mu: Vec<f64>,
    pub sigma_diag: Vec<f64>,
    pub scaling: Vec<usize>,
}

/// Class-conditional first and second moments of the degree parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMoments {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl ThetaMoments {
    /// Closed-form moments of the sampler; identical across classes.
    pub fn population(d: &Dist, k: usize) -> Result<Self> {
        match (d.closed_form_moment(1), d.closed_form_moment(2)) {
            (Some(m1), Some(m2)) => Ok(ThetaMoments { first: vec![m1; k], second: vec![m2; k] }),
            _ => Err(GeeError::Config(format!("no closed-form moments for degree sampler {d:?}"))),
        }
    }

    /// Per-class sample moments of realised degree parameters.
    pub fn empirical(theta: &[f64], labels: &[u32], k: usize) -> Result<Self> {
        let mut first = vec![0.0; k];
        let mut second = vec![0.0; k];
        let mut count = vec![0usize; k];
        for (&t, &y) in theta.iter().zip(labels) {
            if y == 0 {
                continue;
            }
            let c = y as usize - 1;
            first[c] += t;
            second[c] += t * t;
            count[c] += 1;
        }
        for c in 0..k {
            if count[c] == 0 {
                return Err(GeeError::Config(format!("class {} has no vertices", c + 1)));
            }
            first[c] /= count[c] as f64;
            second[c] /= count[c] as f64;
        }
        Ok(ThetaMoments { first, second })
    }
}

fn check_class(class: usize, k: usize) -> Result<usize> {
    if class == 0 || class > k {
        return Err(GeeError::Domain(format!("class {class} outside 1..={k}")));
    }
    Ok(class - 1)
}

fn check_counts(counts: &[usize], k: usize) -> Result<()> {
    if counts.len() != k {
        return Err(GeeError::Domain(format!("{} class counts for {k} classes", counts.len())));
    }
    Ok(())
}

impl MomentOracle {
    pub fn sbm(b: &[Vec<f64>], class: usize, counts: &[usize]) -> Result<Self> {
        let y = check_class(class, b.len())?;
        check_counts(counts, b.len())?;
        let mu = b[y].clone();
        let sigma_diag = mu.iter().map(|&p| p * (1.0 - p)).collect();
        Ok(MomentOracle { mu, sigma_diag, scaling: counts.to_vec() })
    }

    pub fn dcsbm(b: &[Vec<f64>], vertex: &VertexContext, theta: &ThetaMoments, counts: &[usize]) -> Result<Self> {
        let k = b.len();
        let y = check_class(vertex.class, k)?;
        check_counts(counts, k)?;
        let ti = vertex
            .theta
            .ok_or_else(|| GeeError::Config("DC-SBM moments need the vertex degree parameter".into()))?;
        let mu = (0..k).map(|c| ti * b[y][c] * theta.first[c]).collect();
        let sigma_diag = (0..k)
            .map(|c| ti * ti * theta.second[c] * b[y][c] * (1.0 - b[y][c]))
            .collect();
        Ok(MomentOracle { mu, sigma_diag, scaling: counts.to_vec() })
    }

    /// `class_means[k]` is `E[X | class k]`.
    pub fn rdpg(class_means: &[Vec<f64>], vertex: &VertexContext, counts: &[usize]) -> Result<Self> {
        let k = class_means.len();
        check_class(vertex.class, k)?;
        check_counts(counts, k)?;
        let x = vertex
            .latent
            .as_ref()
            .ok_or_else(|| GeeError::Config("RDPG moments need the vertex latent position".into()))?;
        let mu: Vec<f64> = class_means.iter().map(|m| dot(m, x)).collect();
        let sigma_diag = mu.iter().map(|&m| m - m * m).collect();
        Ok(MomentOracle { mu, sigma_diag, scaling: counts.to_vec() })
    }

    /// `sqrt(n_k) (z_k - mu_k) / sqrt(Sigma(k,k))`; `None` where the variance is 0.
    pub fn standardize(&self, z: &[f64]) -> Vec<Option<f64>> {
        z.iter()
            .enumerate()
            .map(|(c, &x)| {
                let s = self.sigma_diag[c];
                (s > 0.0).then(|| (self.scaling[c] as f64).sqrt() * (x - self.mu[c]) / s.sqrt())
            })
            .collect()
    }
}
