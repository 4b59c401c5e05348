use rand::Rng;

use crate::graph::{Edge, EdgeList, LabelVector};
use crate::rng::{self, tag};

/// Largest graph for which the block model is sampled one pair at a time.
pub const PER_PAIR_CUTOFF: usize = 5000;

/// Undirected simple graph with independent edges `P(i ~ j) = prob(i, j)` for
/// `i < j`. Fails with the first pair whose probability is not in `[0, 1]`.
pub fn sample_pairs(
    n: usize,
    seed: u64,
    prob: impl Fn(usize, usize) -> f64,
) -> Result<EdgeList, (usize, usize, f64)> {
    let mut rng = rng::stream(seed, &[tag::EDGES]);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = prob(i, j);
            if !(0.0..=1.0).contains(&p) {
                return Err((i, j, p));
            }
            if rng.random::<f64>() < p {
                edges.push(Edge::unit(i as u32, j as u32));
            }
        }
    }
    Ok(EdgeList::from_parts_unchecked(n, edges, false))
}

/// Block model edges given labels. Small graphs draw every pair; larger ones
/// visit only the successes in each block by geometric skipping, which has the
/// same distribution and costs `O(n + s + K^2)`.
pub fn sample_sbm_edges(b: &[Vec<f64>], labels: &LabelVector, seed: u64) -> EdgeList {
    let y = labels.as_slice();
    let n = y.len();
    if n <= PER_PAIR_CUTOFF {
        return sample_pairs(n, seed, |i, j| b[y[i] as usize - 1][y[j] as usize - 1])
            .expect("block probabilities are validated");
    }
    let k = b.len();
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); k];
    for (i, &c) in y.iter().enumerate() {
        members[c as usize - 1].push(i as u32);
    }
    let mut rng = rng::stream(seed, &[tag::EDGES]);
    let mut edges = Vec::new();
    for a in 0..k {
        for c in a..k {
            let p = b[a][c];
            if a == c {
                within_block(&members[a], p, &mut rng, &mut edges);
            } else {
                across_blocks(&members[a], &members[c], p, &mut rng, &mut edges);
            }
        }
    }
    EdgeList::from_parts_unchecked(n, edges, false)
}

/// Gap to the next success in a run of Bernoulli(p) trials.
fn skip(rng: &mut impl Rng, log_q: f64) -> u64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    (u.ln() / log_q).floor().min(1e18) as u64
}

fn ordered(a: u32, b: u32) -> Edge {
    Edge::unit(a.min(b), a.max(b))
}

fn within_block(m: &[u32], p: f64, rng: &mut impl Rng, out: &mut Vec<Edge>) {
    let size = m.len() as u64;
    if p <= 0.0 || size < 2 {
        return;
    }
    if p >= 1.0 {
        for v in 1..m.len() {
            for w in 0..v {
                out.push(ordered(m[v], m[w]));
            }
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    // pairs (v, w) with w < v, enumerated row by row
    let (mut v, mut w): (u64, i64) = (1, -1);
    while v < size {
        w += 1 + skip(rng, log_q) as i64;
        while w >= v as i64 && v < size {
            w -= v as i64;
            v += 1;
        }
        if v < size {
            out.push(ordered(m[v as usize], m[w as usize]));
        }
    }
}

fn across_blocks(a: &[u32], b: &[u32], p: f64, rng: &mut impl Rng, out: &mut Vec<Edge>) {
    let total = a.len() as u64 * b.len() as u64;
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        for &u in a {
            for &v in b {
                out.push(ordered(u, v));
            }
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let cols = b.len() as u64;
    let mut idx = skip(rng, log_q);
    while idx < total {
        out.push(ordered(a[(idx / cols) as usize], b[(idx % cols) as usize]));
        idx = idx.saturating_add(1 + skip(rng, log_q));
    }
}
