//! One-hot graph encoder embedding.
//!
//! `Z = A W` for the adjacency variant and `Z = D^{-1/2} A D^{-1/2} W` for the
//! Laplacian variant, where `W` is the one-hot label matrix with column `k`
//! scaled by `1/n_k`. Neither `A` nor `W` is materialised: one pass over the
//! edgelist accumulates `Z` directly, for `O(nK + s)` time and memory.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeeError, Result};
use crate::graph::{laplacian_reweight, validate_labels, Edge, EdgeList, LabelVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Adjacency,
    Laplacian,
}

impl Variant {
    /// Short name used on the command line (`aee` / `lee`).
    pub fn short_name(self) -> &'static str {
        match self {
            Variant::Adjacency => "aee",
            Variant::Laplacian => "lee",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Variant {
    type Err = GeeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aee" | "adjacency" => Ok(Variant::Adjacency),
            "lee" | "laplacian" => Ok(Variant::Laplacian),
            other => Err(GeeError::Config(format!("unknown embedding variant {other:?}"))),
        }
    }
}

/// Sparse column-normalised one-hot matrix: row `i` holds `1/n_{Y_i}` in
/// column `Y_i`, or nothing when vertex `i` is unlabelled.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderWeights {
    class: Vec<u32>,
    /// `1 / n_k` per class; index 0 is the unknown class and holds 0.
    scale: Vec<f64>,
    counts: Vec<usize>,
}

impl EncoderWeights {
    pub fn n(&self) -> usize {
        self.class.len()
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.counts
    }

    /// Entry `W(i, c)` with `c` a 0-based column.
    pub fn get(&self, i: usize, c: usize) -> f64 {
        if self.class[i] as usize == c + 1 {
            self.scale[c + 1]
        } else {
            0.0
        }
    }

    /// Column (0-based) and value of row `i`, or `None` for an all-zero row.
    pub fn entry(&self, i: usize) -> Option<(usize, f64)> {
        match self.class[i] {
            0 => None,
            c => Some((c as usize - 1, self.scale[c as usize])),
        }
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.k()];
        if let Some((c, w)) = self.entry(i) {
            row[c] = w;
        }
        row
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.k()];
        for i in 0..self.n() {
            if let Some((c, w)) = self.entry(i) {
                sums[c] += w;
            }
        }
        sums
    }
}

/// Builds `W` from labels; fails when a class has no known member.
pub fn build_weights(labels: &LabelVector) -> Result<EncoderWeights> {
    let counts = validate_labels(labels)?;
    let class = labels.as_slice().to_vec();
    let scale = std::iter::once(0.0).chain(counts.iter().map(|&c| 1.0 / c as f64)).collect();
    Ok(EncoderWeights { class, scale, counts })
}

/// Dense `n × K` vertex embedding stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    n: usize,
    k: usize,
    data: Vec<f64>,
    variant: Variant,
}

impl Embedding {
    pub fn zeros(n: usize, k: usize, variant: Variant) -> Self {
        Embedding { n, k, data: vec![0.0; n * k], variant }
    }

    pub fn from_rows(rows: &[Vec<f64>], variant: Variant) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(GeeError::Domain("embedding rows have unequal lengths".into()));
        }
        Ok(Embedding {
            n: rows.len(),
            k,
            data: rows.concat(),
            variant,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.k..(i + 1) * self.k]
    }

    /// Entry at a 0-based column.
    pub fn get(&self, i: usize, c: usize) -> f64 {
        self.data[i * self.k + c]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.k.max(1)).take(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// New embedding made of the given rows, in order.
    pub fn select_rows(&self, idx: &[usize]) -> Embedding {
        let mut data = Vec::with_capacity(idx.len() * self.k);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Embedding { n: idx.len(), k: self.k, data, variant: self.variant }
    }

    /// Largest absolute entrywise difference to another embedding of equal shape.
    pub fn max_abs_diff(&self, other: &Embedding) -> f64 {
        assert_eq!((self.n, self.k), (other.n, other.k), "embedding shapes differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `Z(i, k)` read as the estimated probability that vertex `i` links to a
    /// random member of class `k` (1-based).
    pub fn conditional_edge_estimate(&self, i: usize, class: usize) -> Result<f64> {
        if i >= self.n {
            return Err(GeeError::Domain(format!("vertex {i} outside [0, {})", self.n)));
        }
        if class == 0 || class > self.k {
            return Err(GeeError::Domain(format!("class {class} outside 1..={}", self.k)));
        }
        Ok(self.get(i, class - 1))
    }
}

fn check_sizes(edges: &EdgeList, labels: &LabelVector) -> Result<()> {
    if edges.n() != labels.len() {
        return Err(GeeError::Domain(format!(
            "edgelist has {} vertices but label vector has {} entries",
            edges.n(),
            labels.len()
        )));
    }
    Ok(())
}

/// Runs the encoder: returns `Z` together with the `W` it was built from.
pub fn encode(
    edges: &EdgeList,
    labels: &LabelVector,
    variant: Variant,
) -> Result<(Embedding, EncoderWeights)> {
    check_sizes(edges, labels)?;
    let w = build_weights(labels)?;
    let z = encode_with_weights(edges, &w, variant)?;
    Ok((z, w))
}

/// Encodes against an existing `W`.
pub fn encode_with_weights(
    edges: &EdgeList,
    weights: &EncoderWeights,
    variant: Variant,
) -> Result<Embedding> {
    if edges.n() != weights.n() {
        return Err(GeeError::Domain(format!(
            "edgelist has {} vertices but W has {} rows",
            edges.n(),
            weights.n()
        )));
    }
    let mut z = Embedding::zeros(edges.n(), weights.k(), variant);
    match variant {
        Variant::Adjacency => accumulate(edges.edges(), edges.is_directed(), weights, &mut z.data),
        Variant::Laplacian => {
            let normalised = laplacian_reweight(edges)?;
            accumulate(normalised.edges(), edges.is_directed(), weights, &mut z.data)
        }
    }
    Ok(z)
}

/// Edge-chunked variant: each chunk accumulates into its own `n × K` buffer and
/// the buffers are summed in chunk order, so the result depends on `chunks` but
/// not on the thread pool. Uses `chunks × n × K` extra memory.
pub fn encode_chunked(
    edges: &EdgeList,
    labels: &LabelVector,
    variant: Variant,
    chunks: usize,
) -> Result<(Embedding, EncoderWeights)> {
    if chunks <= 1 {
        return encode(edges, labels, variant);
    }
    check_sizes(edges, labels)?;
    let w = build_weights(labels)?;
    let reweighted;
    let list = match variant {
        Variant::Adjacency => edges,
        Variant::Laplacian => {
            reweighted = laplacian_reweight(edges)?;
            &reweighted
        }
    };
    let (n, k) = (edges.n(), w.k());
    let chunk_len = list.len().div_ceil(chunks.max(1)).max(1);
    let directed = edges.is_directed();
    let partials: Vec<Vec<f64>> = list
        .edges()
        .par_chunks(chunk_len)
        .map(|chunk| {
            let mut buf = vec![0.0; n * k];
            accumulate(chunk, directed, &w, &mut buf);
            buf
        })
        .collect();
    let mut z = Embedding::zeros(n, k, variant);
    for p in partials {
        for (a, b) in z.data.iter_mut().zip(p) {
            *a += b;
        }
    }
    Ok((z, w))
}

#[inline]
fn accumulate(edges: &[Edge], directed: bool, w: &EncoderWeights, z: &mut [f64]) {
    let k = w.k();
    for e in edges {
        let (u, v) = (e.u as usize, e.v as usize);
        let cv = w.class[v] as usize;
        if cv != 0 {
            z[u * k + cv - 1] += w.scale[cv] * e.w;
        }
        if !directed && u != v {
            let cu = w.class[u] as usize;
            if cu != 0 {
                z[v * k + cu - 1] += w.scale[cu] * e.w;
            }
        }
    }
}
