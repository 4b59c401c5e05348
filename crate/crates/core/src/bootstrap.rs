//! Graph bootstrap through the encoder embedding, a naive vertex bootstrap,
//! and the two-sample distance-correlation permutation test that compares them.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoder::{encode, Embedding, Variant};
use crate::error::{GeeError, Result};
use crate::graph::{Edge, EdgeList, LabelVector};
use crate::registry::Registry;
use crate::rng::{self, tag};

pub const DEFAULT_PERMUTATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcorrTest {
    pub statistic: f64,
    pub permutations: usize,
    pub pvalue: f64,
}

/// Pairwise Euclidean distances, U-centred: zero diagonal, rows and columns summing to zero.
fn u_centred(points: &[&[f64]]) -> Vec<f64> {
    let n = points.len();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = points[i].iter().zip(points[j]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            a[i * n + j] = d;
            a[j * n + i] = d;
        }
    }
    u_centre(&mut a, n);
    a
}

fn u_centre(a: &mut [f64], n: usize) {
    let row: Vec<f64> = a.chunks_exact(n).map(|r| r.iter().sum()).collect();
    let total: f64 = row.iter().sum();
    let (m1, m2) = ((n - 2) as f64, ((n - 1) * (n - 2)) as f64);
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = if i == j { 0.0 } else { a[i * n + j] - row[i] / m1 - row[j] / m1 + total / m2 };
        }
    }
}

/// Two-sample test by unbiased distance correlation between the stacked rows
/// and a group indicator, with a label-permutation null.
///
/// Against the indicator `x`, the U-centred inner product reduces to
/// `-2 xᵀ Ã x`, so all permutations are scored with one matrix product and the
/// observed labelling is scored the same way as column 0.
pub fn two_sample_dcorr(z1: &Embedding, z2: &Embedding, permutations: usize, seed: u64) -> Result<DcorrTest> {
    if z1.k() != z2.k() {
        return Err(GeeError::Domain(format!("samples have {} and {} columns", z1.k(), z2.k())));
    }
    let (n1, n) = (z1.n(), z1.n() + z2.n());
    if n < 4 || z1.n() == 0 || z2.n() == 0 {
        return Err(GeeError::Domain(format!("two-sample test needs 4 rows in two non-empty groups, got {} + {}", z1.n(), z2.n())));
    }
    let points: Vec<&[f64]> = z1.rows().chain(z2.rows()).collect();
    let a = u_centred(&points);
    let aa: f64 = a.iter().map(|v| v * v).sum();

    let observed: Vec<f64> = (0..n).map(|i| if i < n1 { 1.0 } else { 0.0 }).collect();
    let mut b: Vec<f64> = (0..n * n).map(|ij| (observed[ij / n] - observed[ij % n]).abs()).collect();
    u_centre(&mut b, n);
    let bb: f64 = b.iter().map(|v| v * v).sum();
    drop(b);
    let denom = (aa * bb).sqrt();

    let columns = permutations + 1;
    let scores: Vec<f64> = if denom > 0.0 && denom.is_finite() {
        (0..columns)
            .collect::<Vec<_>>()
            .par_chunks(64)
            .flat_map_iter(|chunk| {
                let p = chunk.len();
                let mut x = vec![0.0; n * p];
                for (c, &col) in chunk.iter().enumerate() {
                    let mut labels = observed.clone();
                    if col > 0 {
                        labels.shuffle(&mut rng::stream(seed, &[tag::PERMUTE, col as u64]));
                    }
                    for (r, v) in labels.into_iter().enumerate() {
                        x[r * p + c] = v;
                    }
                }
                let mut ax = vec![0.0; n * p];
                // SAFETY: a is n×n, x and ax are n×p, all row-major with the strides given
                unsafe {
                    matrixmultiply::dgemm(
                        n, n, p, 1.0,
                        a.as_ptr(), n as isize, 1,
                        x.as_ptr(), p as isize, 1,
                        0.0, ax.as_mut_ptr(), p as isize, 1,
                    );
                }
                (0..p)
                    .map(|c| {
                        let q: f64 = (0..n).map(|r| x[r * p + c] * ax[r * p + c]).sum();
                        -2.0 * q / denom
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    } else {
        vec![0.0; columns]
    };
    let statistic = scores[0];
    let exceed = scores[1..].iter().filter(|&&s| s >= statistic).count();
    Ok(DcorrTest {
        statistic,
        permutations,
        pvalue: (1 + exceed) as f64 / (1 + permutations) as f64,
    })
}

/// A resampled graph of `n2` vertices drawn from an original one.
#[derive(Debug, Clone)]
pub struct Resample {
    pub edges: EdgeList,
    pub labels: LabelVector,
    /// Original vertex behind each resampled vertex.
    pub indices: Vec<usize>,
    /// Bernoulli probabilities that had to be clipped into [0, 1].
    pub clip_count: usize,
}

/// A way of resampling a labeled graph.
pub trait Resampler: Send + Sync {
    fn name(&self) -> &'static str;
    fn resample(&self, edges: &EdgeList, labels: &LabelVector, n2: usize, seed: u64) -> Result<Resample>;
}

fn draw_indices(n: usize, n2: usize, seed: u64) -> Result<Vec<usize>> {
    if n2 < 2 {
        return Err(GeeError::Domain(format!("resample size must be at least 2, got {n2}")));
    }
    if n == 0 {
        return Err(GeeError::Domain("cannot resample an empty graph".into()));
    }
    let mut rng = rng::stream(seed, &[tag::RESAMPLE]);
    Ok((0..n2).map(|_| rng.random_range(0..n)).collect())
}

fn check_labels(edges: &EdgeList, labels: &LabelVector) -> Result<()> {
    if edges.n() != labels.len() {
        return Err(GeeError::Domain(format!(
            "edgelist has {} vertices but label vector has {} entries",
            edges.n(),
            labels.len()
        )));
    }
    if !labels.all_known() {
        return Err(GeeError::Domain("bootstrap needs every vertex labeled".into()));
    }
    Ok(())
}

/// Rows of the adjacency embedding are resampled, then each pair `i < j` is
/// linked with probability `Z2[i, Y2[j]]` and mirrored.
pub struct EncoderBootstrap;

impl Resampler for EncoderBootstrap {
    fn name(&self) -> &'static str {
        "gee"
    }

    fn resample(&self, edges: &EdgeList, labels: &LabelVector, n2: usize, seed: u64) -> Result<Resample> {
        check_labels(edges, labels)?;
        let indices = draw_indices(edges.n(), n2, seed)?;
        let (z, _) = encode(edges, labels, Variant::Adjacency)?;
        let y2: Vec<u32> = indices.iter().map(|&i| labels.get(i)).collect();
        let mut rng = rng::stream(seed, &[tag::BERNOULLI]);
        let mut clip_count = 0;
        let mut out = Vec::new();
        for i in 0..n2 {
            let zi = z.row(indices[i]);
            for j in (i + 1)..n2 {
                let raw = zi[y2[j] as usize - 1];
                let p = raw.clamp(0.0, 1.0);
                if p != raw {
                    clip_count += 1;
                }
                if rng.random::<f64>() < p {
                    out.push(Edge::unit(i as u32, j as u32));
                }
            }
        }
        Ok(Resample {
            edges: EdgeList::undirected(n2, out)?,
            labels: LabelVector::new(y2, labels.k())?,
            indices,
            clip_count,
        })
    }
}

/// The induced adjacency `A[ind, ind]` with its diagonal zeroed.
pub struct NaiveBootstrap;

impl Resampler for NaiveBootstrap {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn resample(&self, edges: &EdgeList, labels: &LabelVector, n2: usize, seed: u64) -> Result<Resample> {
        if edges.n() != labels.len() {
            return Err(GeeError::Domain(format!(
                "edgelist has {} vertices but label vector has {} entries",
                edges.n(),
                labels.len()
            )));
        }
        let indices = draw_indices(edges.n(), n2, seed)?;
        let resampled = induced(edges, &indices);
        let y2 = indices.iter().map(|&i| labels.get(i)).collect();
        Ok(Resample { edges: resampled, labels: LabelVector::new(y2, labels.k())?, indices, clip_count: 0 })
    }
}

fn induced(edges: &EdgeList, indices: &[usize]) -> EdgeList {
    let mut positions = vec![Vec::new(); edges.n()];
    for (p, &i) in indices.iter().enumerate() {
        positions[i].push(p as u32);
    }
    let mut out = Vec::new();
    for e in edges.edges() {
        let (pu, pv) = (&positions[e.u as usize], &positions[e.v as usize]);
        if e.u == e.v {
            // copies of a vertex with a self-loop are linked to each other, never to themselves
            for (a, &p) in pu.iter().enumerate() {
                for &q in &pu[a + 1..] {
                    out.push(Edge::new(p, q, e.w));
                }
            }
        } else {
            for &p in pu {
                for &q in pv {
                    out.push(Edge::new(p, q, e.w));
                }
            }
        }
    }
    EdgeList::from_parts_unchecked(indices.len(), out, edges.is_directed())
}

/// Induced-subgraph bootstrap of an edgelist.
pub fn naive_bootstrap(edges: &EdgeList, n2: usize, seed: u64) -> Result<EdgeList> {
    Ok(induced(edges, &draw_indices(edges.n(), n2, seed)?))
}

/// Resamplers by name: `gee` and `naive`.
pub fn resampler_registry() -> Registry<dyn Resampler> {
    let mut reg: Registry<dyn Resampler> = Registry::new("bootstrap method");
    reg.register("gee", Box::new(EncoderBootstrap)).register("naive", Box::new(NaiveBootstrap));
    reg
}

#[derive(Debug, Clone)]
pub struct BootstrapResult {
    pub resample: Resample,
    pub test: DcorrTest,
}

impl BootstrapResult {
    pub fn pvalue(&self) -> f64 {
        self.test.pvalue
    }
}

/// Resamples with `method`, embeds both graphs with their own labels and
/// tests whether the two embeddings share a distribution.
pub fn bootstrap_test(
    method: &dyn Resampler,
    edges: &EdgeList,
    labels: &LabelVector,
    n2: usize,
    seed: u64,
    permutations: usize,
) -> Result<BootstrapResult> {
    check_labels(edges, labels)?;
    let resample = method.resample(edges, labels, n2, seed)?;
    let (z1, _) = encode(edges, labels, Variant::Adjacency)?;
    let (z2, _) = encode(&resample.edges, &resample.labels, Variant::Adjacency)?;
    let test = two_sample_dcorr(&z1, &z2, permutations, rng::derive(seed, &[tag::PERMUTE]))?;
    Ok(BootstrapResult { resample, test })
}

pub fn gee_bootstrap(edges: &EdgeList, labels: &LabelVector, n2: usize, seed: u64, permutations: usize) -> Result<BootstrapResult> {
    bootstrap_test(&EncoderBootstrap, edges, labels, n2, seed, permutations)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub method: String,
    pub n: usize,
    pub n2: usize,
    pub seed: u64,
    pub permutations: usize,
    pub pvalue: f64,
    pub statistic: f64,
    pub clip_count: usize,
    pub mean_degree_original: f64,
    pub mean_degree_resampled: f64,
}

impl BootstrapReport {
    pub fn new(method: &str, edges: &EdgeList, result: &BootstrapResult, seed: u64) -> Self {
        BootstrapReport {
            method: method.to_string(),
            n: edges.n(),
            n2: result.resample.edges.n(),
            seed,
            permutations: result.test.permutations,
            pvalue: result.test.pvalue,
            statistic: result.test.statistic,
            clip_count: result.resample.clip_count,
            mean_degree_original: edges.mean_degree(),
            mean_degree_resampled: result.resample.edges.mean_degree(),
        }
    }
}
