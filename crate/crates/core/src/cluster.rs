//! k-means, the adjusted Rand index and unsupervised encoder embedding.

use std::collections::HashMap;

use rand::Rng;

use crate::encoder::{encode, Embedding, Variant};
use crate::error::{GeeError, Result};
use crate::graph::{EdgeList, LabelVector};
use crate::rng::{self, tag};

/// Lloyd iterations per restart.
pub const MAX_LLOYD_ITERATIONS: usize = 100;
pub const DEFAULT_RESTARTS: usize = 3;
/// Default iteration limit of the unsupervised loop.
pub const DEFAULT_UNSUP_ITERATIONS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    /// 1-based cluster of each point.
    pub labels: Vec<u32>,
    /// Sum of squared distances to the assigned centroids.
    pub objective: f64,
    pub centroids: Vec<Vec<f64>>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, m) in centroids.iter().enumerate() {
        let d = sq_dist(x, m);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn objective(z: &Embedding, assign: &[usize], centroids: &[Vec<f64>]) -> f64 {
    z.rows().zip(assign).map(|(x, &c)| sq_dist(x, &centroids[c])).sum()
}

fn plus_plus_init(z: &Embedding, k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = z.n();
    let mut centroids = vec![z.row(rng.random_range(0..n)).to_vec()];
    let mut d2: Vec<f64> = z.rows().map(|x| sq_dist(x, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = z.row(pick).to_vec();
        for (i, x) in z.rows().enumerate() {
            d2[i] = d2[i].min(sq_dist(x, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Gives every empty cluster the point farthest from its current centroid,
/// taken from a cluster that keeps at least one member.
fn fill_empty(z: &Embedding, assign: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    loop {
        let mut size = vec![0usize; k];
        for &c in assign.iter() {
            size[c] += 1;
        }
        let Some(empty) = size.iter().position(|&s| s == 0) else { return };
        let donor = (0..z.n())
            .filter(|&i| size[assign[i]] > 1)
            .max_by(|&i, &j| {
                let di = sq_dist(z.row(i), &centroids[assign[i]]);
                let dj = sq_dist(z.row(j), &centroids[assign[j]]);
                di.total_cmp(&dj).then(j.cmp(&i))
            });
        let Some(i) = donor else { return };
        assign[i] = empty;
        centroids[empty] = z.row(i).to_vec();
    }
}

fn update_centroids(z: &Embedding, assign: &[usize], centroids: &mut [Vec<f64>]) -> bool {
    let (k, dim) = (centroids.len(), z.k());
    let mut sums = vec![vec![0.0; dim]; k];
    let mut count = vec![0usize; k];
    for (x, &c) in z.rows().zip(assign) {
        count[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(x) {
            *s += v;
        }
    }
    let mut any_empty = false;
    for c in 0..k {
        if count[c] == 0 {
            any_empty = true;
            continue;
        }
        for s in sums[c].iter_mut() {
            *s /= count[c] as f64;
        }
        centroids[c] = std::mem::take(&mut sums[c]);
    }
    any_empty
}

/// One restart; returns the assignment and objective after every assignment step.
pub(crate) fn lloyd(z: &Embedding, k: usize, rng: &mut impl Rng) -> (ClusterAssignment, Vec<f64>) {
    let mut centroids = plus_plus_init(z, k, rng);
    let mut assign = vec![usize::MAX; z.n()];
    let mut trace = Vec::new();
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut changed = false;
        for (i, x) in z.rows().enumerate() {
            let (c, _) = nearest(x, &centroids);
            if assign[i] != c {
                assign[i] = c;
                changed = true;
            }
        }
        trace.push(objective(z, &assign, &centroids));
        if !changed {
            break;
        }
        if update_centroids(z, &assign, &mut centroids) {
            // reseed each empty centroid at the worst-fitting point
            let mut reassigned = assign.clone();
            fill_empty(z, &mut reassigned, &mut centroids);
        }
    }
    fill_empty(z, &mut assign, &mut centroids);
    let objective = objective(z, &assign, &centroids);
    let labels = assign.iter().map(|&c| c as u32 + 1).collect();
    (ClusterAssignment { labels, objective, centroids }, trace)
}

/// k-means++ seeded Lloyd's algorithm, best of `restarts` runs.
///
/// Each restart stops at an assignment fixed point or after
/// [`MAX_LLOYD_ITERATIONS`]. Restart `r` draws from its own stream derived from
/// `seed`, so the result is a function of `(z, k, seed, restarts)` alone.
pub fn kmeans(z: &Embedding, k: usize, seed: u64, restarts: usize) -> Result<ClusterAssignment> {
    if k == 0 {
        return Err(GeeError::Config("k-means needs K >= 1".into()));
    }
    if z.n() < k {
        return Err(GeeError::Domain(format!("{} points cannot form {k} clusters", z.n())));
    }
    let mut best: Option<ClusterAssignment> = None;
    for r in 0..restarts.max(1) {
        let mut rng = rng::stream(seed, &[tag::KMEANS, r as u64]);
        let (fit, _) = lloyd(z, k, &mut rng);
        if best.as_ref().is_none_or(|b| fit.objective < b.objective) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn comb2(x: u64) -> f64 {
    (x as f64) * (x.saturating_sub(1) as f64) / 2.0
}

/// Adjusted Rand index between two labelings of the same points.
///
/// When both labelings make the chance-corrected denominator vanish (each is
/// a single cluster, or each is all singletons) the result is 1 for identical
/// partitions and 0 otherwise.
pub fn ari(a: &[u32], b: &[u32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(GeeError::Domain(format!("labelings have lengths {} and {}", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(GeeError::Domain("ARI needs at least two points".into()));
    }
    let mut cells: HashMap<(u32, u32), u64> = HashMap::new();
    let mut rows: HashMap<u32, u64> = HashMap::new();
    let mut cols: HashMap<u32, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *cells.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = cells.values().map(|&c| comb2(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| comb2(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| comb2(c)).sum();
    let expected = sum_a * sum_b / comb2(a.len() as u64);
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return Ok(if index == sum_a && index == sum_b { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

#[derive(Debug, Clone)]
pub struct UnsupervisedEmbedding {
    pub embedding: Embedding,
    pub labels: LabelVector,
    pub iterations: usize,
    /// Whether the loop stopped because labels stopped changing.
    pub converged: bool,
}

/// Uniform random labels in `1..=k` with every class used.
pub fn random_labels(n: usize, k: usize, seed: u64) -> Result<LabelVector> {
    if n < k || k == 0 {
        return Err(GeeError::Domain(format!("cannot spread {n} vertices over {k} classes")));
    }
    let mut rng = rng::stream(seed, &[tag::INIT]);
    loop {
        let y: Vec<u32> = (0..n).map(|_| rng.random_range(1..=k as u32)).collect();
        let mut used = vec![false; k];
        for &c in &y {
            used[c as usize - 1] = true;
        }
        if used.iter().all(|&u| u) {
            return LabelVector::new(y, k);
        }
    }
}

/// Seed of the k-means call in (1-based) iteration `iteration` of [`gee_unsup`].
pub fn unsup_kmeans_seed(seed: u64, iteration: usize) -> u64 {
    rng::derive(seed, &[tag::KMEANS, iteration as u64])
}

/// Encoder embedding without labels: start from random labels, then alternate
/// encoding and k-means until the labels reproduce themselves (ARI = 1) or
/// `iteration_limit` rounds have run.
pub fn gee_unsup(
    edges: &EdgeList,
    k: usize,
    iteration_limit: usize,
    seed: u64,
    variant: Variant,
    restarts: usize,
) -> Result<UnsupervisedEmbedding> {
    if iteration_limit == 0 {
        return Err(GeeError::Config("iteration limit must be at least 1".into()));
    }
    let mut current = random_labels(edges.n(), k, seed)?;
    for iteration in 1..=iteration_limit {
        let (z, _) = encode(edges, &current, variant)?;
        let fit = kmeans(&z, k, unsup_kmeans_seed(seed, iteration), restarts)?;
        let next = LabelVector::new(fit.labels, k)?;
        let stable = ari(current.as_slice(), next.as_slice())? == 1.0;
        if stable || iteration == iteration_limit {
            return Ok(UnsupervisedEmbedding {
                embedding: z,
                labels: next,
                iterations: iteration,
                converged: stable,
            });
        }
        current = next;
    }
    unreachable!("loop returns on its final iteration")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use proptest::prelude::{prop, prop_assert, proptest, any};

    fn emb(rows: &[&[f64]]) -> Embedding {
        Embedding::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), Variant::Adjacency).unwrap()
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let z = emb(&[&[0.0, 0.0], &[2.0, 0.0], &[1.0, 3.0]]);
        let fit = kmeans(&z, 1, 0, 3).unwrap();
        assert_eq!(fit.labels, vec![1, 1, 1]);
        assert!((fit.centroids[0][0] - 1.0).abs() < 1e-15);
        assert!((fit.centroids[0][1] - 1.0).abs() < 1e-15);
        // n times the mean squared deviation
        let total: f64 = [1.0 + 1.0, 1.0 + 1.0, 0.0 + 4.0].iter().sum();
        assert!((fit.objective - total).abs() < 1e-12);
    }

    #[test]
    fn two_points_two_clusters() {
        let z = emb(&[&[0.0], &[5.0]]);
        let fit = kmeans(&z, 2, 4, 3).unwrap();
        assert_ne!(fit.labels[0], fit.labels[1]);
        assert_eq!(fit.objective, 0.0);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(kmeans(&emb(&[&[1.0]]), 2, 0, 1), Err(GeeError::Domain(_))));
    }

    #[test]
    fn matches_exhaustive_two_partition() {
        let pts: [[f64; 2]; 8] = [
            [0.0, 0.1], [0.2, 0.0], [0.1, 0.3], [0.3, 0.2],
            [3.0, 3.1], [3.2, 2.9], [2.8, 3.0], [3.1, 3.3],
        ];
        let rows: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let z = emb(&rows);
        let cost = |mask: u32| -> f64 {
            let mut total = 0.0;
            for side in [0, 1] {
                let members: Vec<&[f64; 2]> = (0..8).filter(|&i| (mask >> i) & 1 == side).map(|i| &pts[i]).collect();
                if members.is_empty() {
                    return f64::INFINITY;
                }
                let m = [0, 1].map(|d| members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64);
                total += members.iter().map(|p| (p[0] - m[0]).powi(2) + (p[1] - m[1]).powi(2)).sum::<f64>();
            }
            total
        };
        let (best_mask, best) = (1..255u32).map(|m| (m, cost(m))).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        let fit = kmeans(&z, 2, 11, 3).unwrap();
        assert!((fit.objective - best).abs() < 1e-12);
        let planted: Vec<u32> = (0..8).map(|i| (best_mask >> i) & 1).collect();
        assert_eq!(ari(&fit.labels, &planted).unwrap(), 1.0);
    }

    #[test]
    fn objective_matches_labels_and_centroids() {
        let mut rng = crate::rng::stream(3, &[]);
        let rows: Vec<Vec<f64>> = (0..200).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
        let z = Embedding::from_rows(&rows, Variant::Adjacency).unwrap();
        let fit = kmeans(&z, 4, 1, 3).unwrap();
        let recomputed: f64 = rows
            .iter()
            .zip(&fit.labels)
            .map(|(x, &c)| sq_dist(x, &fit.centroids[c as usize - 1]))
            .sum();
        assert!((recomputed - fit.objective).abs() < 1e-9);
        assert!(fit.labels.iter().all(|&c| (1..=4).contains(&c)));
    }

    #[test]
    fn identical_points_still_fill_every_cluster() {
        let z = emb(&[&[1.0], &[1.0], &[1.0], &[1.0]]);
        let fit = kmeans(&z, 3, 0, 2).unwrap();
        let mut used: Vec<u32> = fit.labels.clone();
        used.sort();
        used.dedup();
        assert_eq!(used, vec![1, 2, 3]);
        assert_eq!(fit.objective, 0.0);
    }

    #[test]
    fn ari_examples() {
        assert_eq!(ari(&[1, 1, 2, 2, 3], &[1, 1, 2, 2, 3]).unwrap(), 1.0);
        assert_eq!(ari(&[1, 1, 2, 2, 3], &[3, 3, 1, 1, 2]).unwrap(), 1.0);
        assert!((ari(&[1, 1, 2, 2], &[1, 2, 1, 2]).unwrap() + 0.5).abs() < 1e-15);
        assert!(ari(&[1, 2], &[1]).is_err());
        assert!(ari(&[1], &[1]).is_err());
    }

    #[test]
    fn ari_degenerate_denominator() {
        assert_eq!(ari(&[1, 1, 1], &[2, 2, 2]).unwrap(), 1.0);
        assert_eq!(ari(&[1, 2, 3], &[3, 1, 2]).unwrap(), 1.0);
        assert_eq!(ari(&[1, 1, 1], &[1, 2, 3]).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn ari_symmetric_and_relabel_invariant(
            a in prop::collection::vec(1u32..5, 2..40),
            seed in any::<u64>(),
        ) {
            let mut rng = crate::rng::stream(seed, &[]);
            let b: Vec<u32> = a.iter().map(|_| rng.random_range(1..4)).collect();
            let perm = [0, 4, 2, 3, 1];
            let a2: Vec<u32> = a.iter().map(|&x| perm[x as usize]).collect();
            let ab = ari(&a, &b).unwrap();
            prop_assert!((ab - ari(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!((ab - ari(&a2, &b).unwrap()).abs() < 1e-12);
            prop_assert!(ab <= 1.0 + 1e-12);
        }

        #[test]
        fn lloyd_objective_never_increases(seed in any::<u64>(), k in 1usize..6) {
            let mut rng = crate::rng::stream(seed, &[1]);
            let rows: Vec<Vec<f64>> = (0..60).map(|_| (0..2).map(|_| rng.random::<f64>()).collect()).collect();
            let z = Embedding::from_rows(&rows, Variant::Adjacency).unwrap();
            let (_, trace) = lloyd(&z, k, &mut rng);
            for w in trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", trace);
            }
        }
    }

    fn two_cliques(size: u32) -> (EdgeList, Vec<u32>) {
        let mut edges = Vec::new();
        for block in 0..2 {
            let off = block * size;
            for i in 0..size {
                for j in (i + 1)..size {
                    edges.push(Edge::unit(off + i, off + j));
                }
            }
        }
        let truth = (0..2 * size).map(|i| i / size + 1).collect();
        (EdgeList::undirected(2 * size as usize, edges).unwrap(), truth)
    }

    #[test]
    fn unsupervised_recovers_two_cliques() {
        let (e, truth) = two_cliques(20);
        let out = gee_unsup(&e, 2, 30, 0, Variant::Adjacency, 3).unwrap();
        assert_eq!(ari(out.labels.as_slice(), &truth).unwrap(), 1.0);
        assert!(out.converged);
        let hits = (0..200)
            .filter(|&s| {
                let out = gee_unsup(&e, 2, 30, s, Variant::Adjacency, 3).unwrap();
                ari(out.labels.as_slice(), &truth).unwrap() == 1.0
            })
            .count();
        // a random start that splits both cliques evenly is itself a fixed point
        assert!(hits >= 160, "recovered on {hits}/200 seeds");
    }

    #[test]
    fn evenly_split_start_is_a_fixed_point() {
        let (e, truth) = two_cliques(20);
        let y: Vec<u32> = (0..40).map(|i| i % 2 + 1).collect();
        let (z, _) = encode(&e, &LabelVector::new(y.clone(), 2).unwrap(), Variant::Adjacency).unwrap();
        let fit = kmeans(&z, 2, 0, 3).unwrap();
        assert_eq!(ari(&fit.labels, &y).unwrap(), 1.0);
        assert!(ari(&fit.labels, &truth).unwrap() < 0.1);
    }

    #[test]
    fn single_iteration_is_encode_then_kmeans() {
        let (e, _) = two_cliques(15);
        let out = gee_unsup(&e, 2, 1, 21, Variant::Adjacency, 3).unwrap();
        let y0 = random_labels(e.n(), 2, 21).unwrap();
        let (z, _) = encode(&e, &y0, Variant::Adjacency).unwrap();
        let fit = kmeans(&z, 2, unsup_kmeans_seed(21, 1), 3).unwrap();
        assert_eq!(out.embedding, z);
        assert_eq!(out.labels.as_slice(), fit.labels.as_slice());
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn unsupervised_is_deterministic() {
        let (e, _) = two_cliques(12);
        let a = gee_unsup(&e, 3, 10, 5, Variant::Laplacian, 3).unwrap();
        let b = gee_unsup(&e, 3, 10, 5, Variant::Laplacian, 3).unwrap();
        assert_eq!(a.labels, b.labels);
        assert!(matches!(gee_unsup(&e, 2, 0, 5, Variant::Adjacency, 3), Err(GeeError::Config(_))));
    }
}
