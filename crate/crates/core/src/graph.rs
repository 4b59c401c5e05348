//! Edgelist, labels and degrees.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeeError, Result};

/// One row of the s×3 edge table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub w: f64,
}

impl Edge {
    pub fn new(u: u32, v: u32, w: f64) -> Self {
        Edge { u, v, w }
    }

    pub fn unit(u: u32, v: u32) -> Self {
        Edge { u, v, w: 1.0 }
    }
}

/// A graph stored as an edgelist over dense 0-based vertex ids.
///
/// Undirected graphs list each edge once. Duplicate rows are kept and act as
/// summed weights; self-loops are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    n: usize,
    edges: Vec<Edge>,
    directed: bool,
}

impl EdgeList {
    pub fn new(n: usize, edges: Vec<Edge>, directed: bool) -> Result<Self> {
        if n > u32::MAX as usize + 1 {
            return Err(GeeError::Domain(format!("{n} vertices exceed the u32 id space")));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.u as usize >= n || e.v as usize >= n {
                return Err(GeeError::Domain(format!(
                    "edge {i} ({}, {}) references a vertex outside [0, {n})",
                    e.u, e.v
                )));
            }
            if !e.w.is_finite() {
                return Err(GeeError::Domain(format!("edge {i} has non-finite weight {}", e.w)));
            }
        }
        Ok(EdgeList { n, edges, directed })
    }

    /// Builds an undirected list with every id bound checked.
    pub fn undirected(n: usize, edges: Vec<Edge>) -> Result<Self> {
        Self::new(n, edges, false)
    }

    pub(crate) fn from_parts_unchecked(n: usize, edges: Vec<Edge>, directed: bool) -> Self {
        debug_assert!(edges.iter().all(|e| (e.u as usize) < n && (e.v as usize) < n));
        EdgeList { n, edges, directed }
    }

    pub fn empty(n: usize) -> Self {
        EdgeList { n, edges: Vec::new(), directed: false }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored rows, `s`.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn with_directed(mut self, directed: bool) -> Self {
        self.directed = directed;
        self
    }

    /// Same edges over a vertex set enlarged to `n` (new vertices are isolated).
    pub fn with_vertex_count(mut self, n: usize) -> Result<Self> {
        if n < self.n {
            return Err(GeeError::Domain(format!(
                "cannot shrink vertex count from {} to {n}",
                self.n
            )));
        }
        self.n = n;
        Ok(self)
    }

    /// Copy with every weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> EdgeList {
        let edges = self.edges.iter().map(|e| Edge { w: e.w * c, ..*e }).collect();
        EdgeList { n: self.n, edges, directed: self.directed }
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Average number of incident edge endpoints per vertex.
    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let ends: usize = self
            .edges
            .iter()
            .map(|e| if e.u == e.v { 1 } else { 2 })
            .sum();
        ends as f64 / self.n as f64
    }

    pub fn into_edges(self) -> Vec<Edge> {
        self.edges
    }
}

/// Per-vertex class labels; 0 marks an unknown label, known labels are `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<u32>,
    k: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<u32>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(GeeError::Config("class count K must be at least 1".into()));
        }
        if let Some((i, &y)) = labels.iter().enumerate().find(|(_, &y)| y as usize > k) {
            return Err(GeeError::Domain(format!("label {y} of vertex {i} exceeds K = {k}")));
        }
        Ok(LabelVector { labels, k })
    }

    /// Labels with K taken as the largest label present.
    pub fn from_labels(labels: Vec<u32>) -> Result<Self> {
        let k = labels.iter().copied().max().unwrap_or(0) as usize;
        Self::new(labels, k.max(1))
    }

    /// Normalises raw integer labels: anything `<= 0` becomes unknown.
    pub fn from_signed(raw: &[i64]) -> Result<Self> {
        let mut labels = Vec::with_capacity(raw.len());
        for (i, &y) in raw.iter().enumerate() {
            if y > u32::MAX as i64 {
                return Err(GeeError::Domain(format!("label {y} of vertex {i} is too large")));
            }
            labels.push(y.max(0) as u32);
        }
        Self::from_labels(labels)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.labels
    }

    pub fn get(&self, i: usize) -> u32 {
        self.labels[i]
    }

    /// Copy with the given vertices set to unknown.
    pub fn masked(&self, hide: &[usize]) -> LabelVector {
        let mut labels = self.labels.clone();
        for &i in hide {
            labels[i] = 0;
        }
        LabelVector { labels, k: self.k }
    }

    pub fn known_indices(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] > 0).collect()
    }

    pub fn all_known(&self) -> bool {
        self.labels.iter().all(|&y| y > 0)
    }

    /// Labels padded with unknowns up to length `n`.
    pub fn padded(&self, n: usize) -> LabelVector {
        let mut labels = self.labels.clone();
        labels.resize(n.max(labels.len()), 0);
        LabelVector { labels, k: self.k }
    }
}

/// Class sizes `n_1..n_K` of the known labels. Errors when a class is empty.
pub fn validate_labels(labels: &LabelVector) -> Result<Vec<usize>> {
    let k = labels.k();
    let mut counts = vec![0usize; k];
    for (i, &y) in labels.as_slice().iter().enumerate() {
        match y as usize {
            0 => {}
            c if c <= k => counts[c - 1] += 1,
            c => {
                return Err(GeeError::Domain(format!("label {c} of vertex {i} exceeds K = {k}")))
            }
        }
    }
    if let Some(c) = counts.iter().position(|&m| m == 0) {
        return Err(GeeError::Config(format!(
            "class {} has no vertex with a known label",
            c + 1
        )));
    }
    Ok(counts)
}

/// Weighted vertex degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector(pub Vec<f64>);

impl DegreeVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Sum of incident edge weights per vertex. Every edge counts at both of its
/// endpoints (directed edges included) and a self-loop counts once.
pub fn compute_degrees(edges: &EdgeList) -> DegreeVector {
    let mut deg = vec![0.0; edges.n()];
    accumulate_degrees(edges.edges(), &mut deg);
    DegreeVector(deg)
}

fn accumulate_degrees(edges: &[Edge], deg: &mut [f64]) {
    for e in edges {
        deg[e.u as usize] += e.w;
        if e.u != e.v {
            deg[e.v as usize] += e.w;
        }
    }
}

/// Edge-chunked parallel variant of [`compute_degrees`]; partial sums are
/// merged in chunk order, so output depends only on `chunks`.
pub fn compute_degrees_chunked(edges: &EdgeList, chunks: usize) -> DegreeVector {
    let n = edges.n();
    let chunk_len = edges.len().div_ceil(chunks.max(1)).max(1);
    let partials: Vec<Vec<f64>> = edges
        .edges()
        .par_chunks(chunk_len)
        .map(|chunk| {
            let mut deg = vec![0.0; n];
            accumulate_degrees(chunk, &mut deg);
            deg
        })
        .collect();
    let mut deg = vec![0.0; n];
    for p in partials {
        for (d, x) in deg.iter_mut().zip(p) {
            *d += x;
        }
    }
    DegreeVector(deg)
}

/// Degree-normalised copy: each weight becomes `w / sqrt(d_u d_v)`.
///
/// One pass computes degrees, a second rewrites the weights. Fails if an edge
/// touches a vertex whose weighted degree is not positive, which can only
/// happen with non-positive weights.
pub fn laplacian_reweight(edges: &EdgeList) -> Result<EdgeList> {
    let deg = compute_degrees(edges);
    let inv_sqrt: Vec<f64> = deg.0.iter().map(|&d| if d > 0.0 { d.sqrt().recip() } else { f64::NAN }).collect();
    let mut out = Vec::with_capacity(edges.len());
    for e in edges.edges() {
        let (a, b) = (inv_sqrt[e.u as usize], inv_sqrt[e.v as usize]);
        if a.is_nan() || b.is_nan() {
            let bad = if a.is_nan() { e.u } else { e.v };
            return Err(GeeError::Domain(format!(
                "vertex {bad} has non-positive degree {}; Laplacian weights are undefined",
                deg.0[bad as usize]
            )));
        }
        out.push(Edge { w: e.w * a * b, ..*e });
    }
    Ok(EdgeList::from_parts_unchecked(edges.n(), out, edges.is_directed()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path3() -> EdgeList {
        EdgeList::undirected(3, vec![Edge::unit(0, 1), Edge::unit(1, 2)]).unwrap()
    }

    #[test]
    fn single_edge_degrees() {
        let e = EdgeList::undirected(2, vec![Edge::unit(0, 1)]).unwrap();
        assert_eq!(compute_degrees(&e).0, vec![1.0, 1.0]);
    }

    #[test]
    fn path_degrees() {
        assert_eq!(compute_degrees(&path3()).0, vec![1.0, 2.0, 1.0]);
    }

    #[test]
    fn self_loop_counts_once() {
        let e = EdgeList::undirected(2, vec![Edge::new(0, 0, 2.0), Edge::unit(0, 1)]).unwrap();
        assert_eq!(compute_degrees(&e).0, vec![3.0, 1.0]);
    }

    #[test]
    fn degrees_match_dense_row_sums() {
        use rand::Rng;
        let mut rng = crate::rng::stream(11, &[]);
        let n = 50;
        let mut edges = Vec::new();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_bool(0.2) {
                    let w: f64 = rng.random_range(0.1..2.0);
                    edges.push(Edge::new(i as u32, j as u32, w));
                    dense[i][j] += w;
                    dense[j][i] += w;
                }
            }
        }
        let e = EdgeList::undirected(n, edges).unwrap();
        let deg = compute_degrees(&e);
        for i in 0..n {
            let row: f64 = dense[i].iter().sum();
            assert!((deg.0[i] - row).abs() < 1e-12);
        }
        let chunked = compute_degrees_chunked(&e, 7);
        for (a, b) in deg.0.iter().zip(&chunked.0) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn reweight_single_edge_is_unchanged() {
        let e = EdgeList::undirected(2, vec![Edge::unit(0, 1)]).unwrap();
        assert_eq!(laplacian_reweight(&e).unwrap().edges()[0].w, 1.0);
    }

    #[test]
    fn reweight_path() {
        let r = laplacian_reweight(&path3()).unwrap();
        assert!((r.edges()[0].w - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((r.edges()[1].w - 0.707_106_781_186_547_5).abs() < 1e-15);
    }

    #[test]
    fn reweight_is_not_idempotent_in_general() {
        // the 3-vertex path happens to be a fixed point; the 4-vertex path is not
        let path4 = EdgeList::undirected(4, vec![Edge::unit(0, 1), Edge::unit(1, 2), Edge::unit(2, 3)]).unwrap();
        let once = laplacian_reweight(&path4).unwrap();
        let twice = laplacian_reweight(&once).unwrap();
        assert!((once.edges()[0].w - twice.edges()[0].w).abs() > 1e-2);
        let disjoint = EdgeList::undirected(4, vec![Edge::unit(0, 1), Edge::unit(2, 3)]).unwrap();
        assert_eq!(laplacian_reweight(&disjoint).unwrap(), disjoint);
    }

    #[test]
    fn reweight_rejects_zero_degree() {
        let e = EdgeList::undirected(2, vec![Edge::new(0, 1, 1.0), Edge::new(0, 1, -1.0)]).unwrap();
        assert!(matches!(laplacian_reweight(&e), Err(GeeError::Domain(_))));
    }

    #[test]
    fn out_of_range_ids_rejected() {
        assert!(EdgeList::undirected(2, vec![Edge::unit(0, 2)]).is_err());
        assert!(EdgeList::undirected(2, vec![Edge::new(0, 1, f64::NAN)]).is_err());
    }

    #[test]
    fn class_counts() {
        let y = LabelVector::new(vec![1, 1, 2], 2).unwrap();
        assert_eq!(validate_labels(&y).unwrap(), vec![2, 1]);
        let y = LabelVector::new(vec![0, 0, 1], 1).unwrap();
        assert_eq!(validate_labels(&y).unwrap(), vec![1]);
    }

    #[test]
    fn empty_class_is_a_configuration_error() {
        let y = LabelVector::new(vec![1, 1], 2).unwrap();
        assert!(matches!(validate_labels(&y), Err(GeeError::Config(_))));
    }

    #[test]
    fn out_of_range_label_is_a_domain_error() {
        assert!(matches!(LabelVector::new(vec![1, 3], 2), Err(GeeError::Domain(_))));
    }

    #[test]
    fn negative_labels_become_unknown() {
        let y = LabelVector::from_signed(&[-1, 2, 0, 1, -7]).unwrap();
        assert_eq!(y.as_slice(), &[0, 2, 0, 1, 0]);
        assert_eq!(y.k(), 2);
    }

    proptest! {
        #[test]
        fn degrees_are_edge_order_invariant(
            raw in prop::collection::vec((0u32..20, 0u32..20, 0.0f64..5.0), 0..80),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            let edges: Vec<Edge> = raw.into_iter().map(|(u, v, w)| Edge::new(u, v, w)).collect();
            let mut shuffled = edges.clone();
            shuffled.shuffle(&mut crate::rng::stream(seed, &[]));
            let a = compute_degrees(&EdgeList::undirected(20, edges).unwrap());
            let b = compute_degrees(&EdgeList::undirected(20, shuffled).unwrap());
            for (x, y) in a.0.iter().zip(&b.0) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
