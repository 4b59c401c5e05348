//! Random graph models: stochastic block model, its degree-corrected variant
//! and the random dot product graph, each with the asymptotic moments of the
//! encoder embedding under that model.
//!
//! Models are built from a JSON document through a name-keyed registry:
//!
//! ```json
//! {"model": "dcsbm", "B": [[0.9, 0.1], [0.1, 0.5]], "prior": [0.5, 0.5],
//!  "theta": {"dist": "beta", "params": [1, 4]}}
//! ```

pub mod dist;
mod moments;
mod quadrature;
mod sample;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use dist::{Dist, DistDoc, NORMAL_CLIP};
pub use moments::{MomentOracle, ThetaMoments, VertexContext};
pub use quadrature::integrate;
pub use sample::{sample_pairs, sample_sbm_edges, PER_PAIR_CUTOFF};

use crate::error::{GeeError, Result};
use crate::graph::{EdgeList, LabelVector};
use crate::registry::Registry;
use crate::rng::{self, tag};

/// How vertex labels are assigned.
#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    /// Each label drawn independently with these class probabilities.
    Probabilities(Vec<f64>),
    /// Labels given up front (`1..=K`); the graph size must match.
    Fixed(Vec<u32>),
}

impl Prior {
    fn check(&self, k: usize) -> Result<()> {
        match self {
            Prior::Probabilities(p) => {
                if p.len() != k {
                    return Err(GeeError::Spec(format!("prior has {} entries, expected {k}", p.len())));
                }
                if p.iter().any(|&x| !(x > 0.0 && x < 1.0) && !(k == 1 && x == 1.0)) {
                    return Err(GeeError::Spec(format!("prior entries must lie in (0, 1): {p:?}")));
                }
                let total: f64 = p.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(GeeError::Spec(format!("prior sums to {total}, not 1")));
                }
                Ok(())
            }
            Prior::Fixed(y) => {
                if let Some(&bad) = y.iter().find(|&&c| c == 0 || c as usize > k) {
                    return Err(GeeError::Spec(format!("fixed label {bad} outside 1..={k}")));
                }
                Ok(())
            }
        }
    }

    /// Labels for `n` vertices.
    pub fn draw(&self, n: usize, k: usize, seed: u64) -> Result<LabelVector> {
        let labels = match self {
            Prior::Fixed(y) => {
                if y.len() != n {
                    return Err(GeeError::Domain(format!(
                        "fixed labels cover {} vertices, asked for {n}",
                        y.len()
                    )));
                }
                y.clone()
            }
            Prior::Probabilities(p) => {
                let mut rng = rng::stream(seed, &[tag::LABELS]);
                let mut cdf: Vec<f64> = p
                    .iter()
                    .scan(0.0, |acc, &x| {
                        *acc += x;
                        Some(*acc)
                    })
                    .collect();
                *cdf.last_mut().expect("K >= 1") = 1.0;
                (0..n)
                    .map(|_| {
                        let u: f64 = rng.random();
                        cdf.iter().position(|&c| u < c).unwrap_or(k - 1) as u32 + 1
                    })
                    .collect()
            }
        };
        LabelVector::new(labels, k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbmSpec {
    pub b: Vec<Vec<f64>>,
    pub prior: Prior,
}

impl SbmSpec {
    pub fn new(b: Vec<Vec<f64>>, prior: Prior) -> Result<Self> {
        let spec = SbmSpec { b, prior };
        spec.check()?;
        Ok(spec)
    }

    /// `K` equal-probability classes.
    pub fn balanced(b: Vec<Vec<f64>>) -> Result<Self> {
        let k = b.len();
        Self::new(b, Prior::Probabilities(vec![1.0 / k as f64; k]))
    }

    pub fn k(&self) -> usize {
        self.b.len()
    }

    fn check(&self) -> Result<()> {
        let k = self.b.len();
        if k == 0 {
            return Err(GeeError::Spec("block matrix is empty".into()));
        }
        for (i, row) in self.b.iter().enumerate() {
            if row.len() != k {
                return Err(GeeError::Spec(format!("block matrix row {i} has {} entries, expected {k}", row.len())));
            }
            for (j, &x) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&x) {
                    return Err(GeeError::Spec(format!("B[{i}][{j}] = {x} is not a probability")));
                }
                if (x - self.b[j][i]).abs() > 1e-12 {
                    return Err(GeeError::Spec(format!("block matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        self.prior.check(k)
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<(EdgeList, LabelVector)> {
        let labels = self.prior.draw(n, self.k(), seed)?;
        let edges = sample_sbm_edges(&self.b, &labels, seed);
        Ok((edges, labels))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcsbmSpec {
    pub base: SbmSpec,
    pub theta: Dist,
}

impl DcsbmSpec {
    pub fn new(base: SbmSpec, theta: Dist) -> Result<Self> {
        match theta {
            Dist::Beta { .. } | Dist::Uniform { .. } | Dist::Constant(_) => {}
            Dist::Normal { .. } => {
                return Err(GeeError::Config("degree parameters support beta, uniform or constant samplers".into()))
            }
        }
        let (lo, hi) = theta.support();
        if lo < 0.0 || hi <= 0.0 || theta == Dist::Constant(0.0) {
            return Err(GeeError::Spec(format!("degree sampler {theta:?} must be supported on (0, M]")));
        }
        Ok(DcsbmSpec { base, theta })
    }

    pub fn k(&self) -> usize {
        self.base.k()
    }

    /// Returns the graph, labels and realised degree parameters.
    pub fn sample(&self, n: usize, seed: u64) -> Result<(EdgeList, LabelVector, Vec<f64>)> {
        let labels = self.base.prior.draw(n, self.k(), seed)?;
        let mut rng = rng::stream(seed, &[tag::THETA]);
        let theta: Vec<f64> = (0..n).map(|_| self.theta.sample(&mut rng).0).collect();
        let edges = self.sample_given(&labels, &theta, seed)?;
        Ok((edges, labels, theta))
    }

    /// Redraws edges only, for fixed labels and degree parameters.
    pub fn sample_given(&self, labels: &LabelVector, theta: &[f64], seed: u64) -> Result<EdgeList> {
        let y = labels.as_slice();
        let b = &self.base.b;
        sample_pairs(y.len(), seed, |i, j| {
            theta[i] * theta[j] * b[y[i] as usize - 1][y[j] as usize - 1]
        })
        .map_err(|(i, j, p)| {
            GeeError::Spec(format!(
                "edge probability theta_{i} * theta_{j} * B = {p} for pair ({i}, {j}) exceeds 1"
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdpgSpec {
    /// Per-class sampler; each of the `dim` coordinates is drawn from it.
    pub latents: Vec<Dist>,
    pub dim: usize,
    pub prior: Prior,
}

/// Graph, labels, latent positions and how many coordinates were clipped.
pub type RdpgSample = (EdgeList, LabelVector, Vec<Vec<f64>>, usize);

impl RdpgSpec {
    pub fn new(latents: Vec<Dist>, dim: usize, prior: Prior) -> Result<Self> {
        if latents.is_empty() || dim == 0 {
            return Err(GeeError::Spec("RDPG needs at least one class and dimension".into()));
        }
        for d in &latents {
            let (lo, hi) = d.support();
            if lo < 0.0 || hi > 1.0 {
                return Err(GeeError::Spec(format!("latent sampler {d:?} leaves [0, 1]")));
            }
        }
        prior.check(latents.len())?;
        Ok(RdpgSpec { latents, dim, prior })
    }

    pub fn k(&self) -> usize {
        self.latents.len()
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<RdpgSample> {
        let labels = self.prior.draw(n, self.k(), seed)?;
        let mut rng = rng::stream(seed, &[tag::LATENT]);
        let mut clipped = 0;
        let x: Vec<Vec<f64>> = labels
            .as_slice()
            .iter()
            .map(|&y| {
                (0..self.dim)
                    .map(|_| {
                        let (v, c) = self.latents[y as usize - 1].sample(&mut rng);
                        clipped += usize::from(c);
                        v
                    })
                    .collect()
            })
            .collect();
        let edges = sample_pairs(n, seed, |i, j| dot(&x[i], &x[j])).map_err(|(i, j, p)| {
            GeeError::Spec(format!("latent inner product {p} for pair ({i}, {j}) is outside (0, 1]"))
        })?;
        Ok((edges, labels, x, clipped))
    }

    /// Per-class latent mean vectors `E[X | Y = k]`, by quadrature.
    pub fn class_latent_means(&self) -> Vec<Vec<f64>> {
        self.latents
            .iter()
            .map(|d| vec![d.mean_by_quadrature(); self.dim])
            .collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A sampled graph with whatever side information its model produces.
#[derive(Debug, Clone)]
pub struct SampledGraph {
    pub edges: EdgeList,
    pub labels: LabelVector,
    pub theta: Option<Vec<f64>>,
    pub latents: Option<Vec<Vec<f64>>>,
    pub clipped: usize,
}

/// Common interface of the registered random graph models.
pub trait GraphModel: Send + Sync {
    fn name(&self) -> &'static str;

    fn k(&self) -> usize;

    fn sample(&self, n: usize, seed: u64) -> Result<SampledGraph>;

    /// Asymptotic mean and variance of one vertex's embedding under the model.
    fn theoretical_moments(&self, vertex: &VertexContext, counts: &[usize]) -> Result<MomentOracle>;
}

impl GraphModel for SbmSpec {
    fn name(&self) -> &'static str {
        "sbm"
    }

    fn k(&self) -> usize {
        SbmSpec::k(self)
    }

    fn sample(&self, n: usize, seed: u64) -> Result<SampledGraph> {
        let (edges, labels) = SbmSpec::sample(self, n, seed)?;
        Ok(SampledGraph { edges, labels, theta: None, latents: None, clipped: 0 })
    }

    fn theoretical_moments(&self, vertex: &VertexContext, counts: &[usize]) -> Result<MomentOracle> {
        MomentOracle::sbm(&self.b, vertex.class, counts)
    }
}

impl GraphModel for DcsbmSpec {
    fn name(&self) -> &'static str {
        "dcsbm"
    }

    fn k(&self) -> usize {
        DcsbmSpec::k(self)
    }

    fn sample(&self, n: usize, seed: u64) -> Result<SampledGraph> {
        let (edges, labels, theta) = DcsbmSpec::sample(self, n, seed)?;
        Ok(SampledGraph { edges, labels, theta: Some(theta), latents: None, clipped: 0 })
    }

    fn theoretical_moments(&self, vertex: &VertexContext, counts: &[usize]) -> Result<MomentOracle> {
        let moments = ThetaMoments::population(&self.theta, self.k())?;
        MomentOracle::dcsbm(&self.base.b, vertex, &moments, counts)
    }
}

impl GraphModel for RdpgSpec {
    fn name(&self) -> &'static str {
        "rdpg"
    }

    fn k(&self) -> usize {
        RdpgSpec::k(self)
    }

    fn sample(&self, n: usize, seed: u64) -> Result<SampledGraph> {
        let (edges, labels, x, clipped) = RdpgSpec::sample(self, n, seed)?;
        Ok(SampledGraph { edges, labels, theta: None, latents: Some(x), clipped })
    }

    fn theoretical_moments(&self, vertex: &VertexContext, counts: &[usize]) -> Result<MomentOracle> {
        MomentOracle::rdpg(&self.class_latent_means(), vertex, counts)
    }
}

/// JSON model document.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ModelDoc {
    pub model: String,
    #[serde(rename = "B", alias = "b", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
    /// Fixed labels, used instead of `prior`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<DistDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latents: Option<Vec<DistDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

impl ModelDoc {
    pub fn parse(json: &str) -> Result<ModelDoc> {
        serde_json::from_str(json).map_err(|e| GeeError::Spec(format!("malformed model document: {e}")))
    }

    fn prior(&self, k: usize) -> Result<Prior> {
        match (&self.labels, &self.prior) {
            (Some(y), _) => Ok(Prior::Fixed(y.clone())),
            (None, Some(p)) => Ok(Prior::Probabilities(p.clone())),
            (None, None) => Ok(Prior::Probabilities(vec![1.0 / k as f64; k])),
        }
    }

    fn block_matrix(&self) -> Result<SbmSpec> {
        let b = self
            .b
            .clone()
            .ok_or_else(|| GeeError::Spec(format!("model {:?} needs a block matrix B", self.model)))?;
        let prior = self.prior(b.len())?;
        SbmSpec::new(b, prior)
    }
}

/// Builds a model from its JSON document.
pub trait ModelFactory: Send + Sync {
    fn build(&self, doc: &ModelDoc) -> Result<Box<dyn GraphModel>>;
}

struct SbmFactory;
struct DcsbmFactory;
struct RdpgFactory;

impl ModelFactory for SbmFactory {
    fn build(&self, doc: &ModelDoc) -> Result<Box<dyn GraphModel>> {
        Ok(Box::new(doc.block_matrix()?))
    }
}

impl ModelFactory for DcsbmFactory {
    fn build(&self, doc: &ModelDoc) -> Result<Box<dyn GraphModel>> {
        let theta = doc
            .theta
            .as_ref()
            .ok_or_else(|| GeeError::Spec("dcsbm needs a theta sampler".into()))?;
        Ok(Box::new(DcsbmSpec::new(doc.block_matrix()?, Dist::from_doc(theta)?)?))
    }
}

impl ModelFactory for RdpgFactory {
    fn build(&self, doc: &ModelDoc) -> Result<Box<dyn GraphModel>> {
        let latents = doc
            .latents
            .as_ref()
            .ok_or_else(|| GeeError::Spec("rdpg needs one latent sampler per class".into()))?
            .iter()
            .map(Dist::from_doc)
            .collect::<Result<Vec<_>>>()?;
        let prior = doc.prior(latents.len())?;
        Ok(Box::new(RdpgSpec::new(latents, doc.dim.unwrap_or(1), prior)?))
    }
}

pub fn model_registry() -> Registry<dyn ModelFactory> {
    let mut r: Registry<dyn ModelFactory> = Registry::new("graph model");
    r.register("sbm", Box::new(SbmFactory))
        .register("dcsbm", Box::new(DcsbmFactory))
        .register("rdpg", Box::new(RdpgFactory));
    r
}

/// Parses a JSON model document and builds the named model.
pub fn model_from_json(json: &str) -> Result<Box<dyn GraphModel>> {
    let doc = ModelDoc::parse(json)?;
    model_registry().get(&doc.model.to_ascii_lowercase())?.build(&doc)
}
