use proptest::prelude::{prop, prop_assert, prop_assert_eq, proptest};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::*;
use crate::graph::Edge;
use crate::models::SbmSpec;
use crate::rng;

fn emb(rows: Vec<Vec<f64>>) -> Embedding {
    Embedding::from_rows(&rows, Variant::Adjacency).unwrap()
}

#[test]
fn lda_nearer_mean_wins() {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, (mx, my)) in [(1, (0.0, 0.0)), (2, (1.0, 1.0))] {
        for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            rows.push(vec![mx + dx, my + dy]);
            labels.push(c);
        }
    }
    let model = lda_fit(&emb(rows), &labels, 2).unwrap();
    assert_eq!(model.predict(&[0.9, 0.9]), 2);
    assert_eq!(model.predict(&[0.1, 0.2]), 1);
    assert!((model.covariance[(0, 1)]).abs() < 1e-15);
}

#[test]
fn lda_duplicated_points_reduce_to_nearest_mean() {
    let rows = vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![2.0, 1.0], vec![2.0, 1.0]];
    let model = lda_fit(&emb(rows), &[1, 1, 2, 2], 2).unwrap();
    let mut rng = rng::stream(1, &[]);
    for _ in 0..200 {
        let q: [f64; 2] = [rng.random_range(-2.0..4.0), rng.random_range(-2.0..3.0)];
        let d1 = q[0] * q[0] + q[1] * q[1];
        let d2 = (q[0] - 2.0).powi(2) + (q[1] - 1.0).powi(2);
        if (d1 - d2).abs() < 1e-9 {
            continue;
        }
        assert_eq!(model.predict(&q), if d1 < d2 { 1 } else { 2 }, "{q:?}");
    }
}

#[test]
fn lda_too_few_samples() {
    let rows = vec![vec![0.0], vec![1.0], vec![2.0]];
    assert!(matches!(lda_fit(&emb(rows), &[1, 2, 2], 2), Err(GeeError::Domain(_))));
}

#[test]
fn lda_regularised_covariance_is_positive_definite() {
    // collinear rows: second coordinate is twice the first
    let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
    let labels: Vec<u32> = (0..10).map(|i| if i < 5 { 1 } else { 2 }).collect();
    let model = lda_fit(&emb(rows), &labels, 2).unwrap();
    let s = &model.covariance;
    assert_eq!(s, &s.transpose());
    let min_eig = s.clone().symmetric_eigen().eigenvalues.min();
    assert!(min_eig >= model.epsilon * (1.0 - 1e-6), "{min_eig} < {}", model.epsilon);
}

#[test]
fn lda_matches_closed_form_boundary() {
    let mut rng = rng::stream(7, &[]);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..200 {
        let c = if i < 90 { 1 } else { 2 };
        let (a, b): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        let shift = if c == 1 { (0.0, 0.0) } else { (1.5, 0.5) };
        rows.push(vec![shift.0 + a, shift.1 + 0.6 * a + 0.5 * b]);
        labels.push(c);
    }
    let model = lda_fit(&emb(rows.clone()), &labels, 2).unwrap();

    // hand-rolled 2x2 oracle
    let mean = |c: u32| {
        let pts: Vec<&Vec<f64>> = rows.iter().zip(&labels).filter(|(_, &y)| y == c).map(|(r, _)| r).collect();
        let n = pts.len() as f64;
        ([pts.iter().map(|p| p[0]).sum::<f64>() / n, pts.iter().map(|p| p[1]).sum::<f64>() / n], n)
    };
    let ((m1, n1), (m2, n2)) = (mean(1), mean(2));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (r, &y) in rows.iter().zip(&labels) {
        let m = if y == 1 { m1 } else { m2 };
        let (dx, dy) = (r[0] - m[0], r[1] - m[1]);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let dof = 198.0;
    let (sxx, sxy, syy) = (sxx / dof, sxy / dof, syy / dof);
    let det = sxx * syy - sxy * sxy;
    let inv = [[syy / det, -sxy / det], [-sxy / det, sxx / det]];
    let w = |m: [f64; 2]| [inv[0][0] * m[0] + inv[0][1] * m[1], inv[1][0] * m[0] + inv[1][1] * m[1]];
    let (w1, w2) = (w(m1), w(m2));
    let delta = |x: [f64; 2], wk: [f64; 2], mk: [f64; 2], p: f64| {
        x[0] * wk[0] + x[1] * wk[1] - 0.5 * (mk[0] * wk[0] + mk[1] * wk[1]) + p.ln()
    };
    let mut agree = 0;
    let mut total = 0;
    for i in 0..50 {
        for j in 0..50 {
            let x = [-3.0 + 7.0 * i as f64 / 49.0, -3.0 + 6.0 * j as f64 / 49.0];
            let oracle = if delta(x, w2, m2, n2 / 200.0) > delta(x, w1, m1, n1 / 200.0) { 2 } else { 1 };
            agree += (model.predict(&x) == oracle) as usize;
            total += 1;
        }
    }
    assert!(agree as f64 >= 0.99 * total as f64, "{agree}/{total}");
}

#[test]
fn knn_examples() {
    let train = emb(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![5.0, 5.0]]);
    let labels = [1, 2, 2, 1];
    assert_eq!(knn_predict(&train, &labels, &[5.0, 5.0], 1).unwrap(), 1);
    assert_eq!(knn_predict(&train, &labels, &[0.4, 0.4], 3).unwrap(), 2);
    // equidistant neighbours: lower training index first
    let line = emb(vec![vec![1.0], vec![-1.0]]);
    assert_eq!(knn_predict(&line, &[2, 1], &[0.0], 1).unwrap(), 2);
    assert_eq!(knn_predict(&line, &[1, 2], &[0.0], 1).unwrap(), 1);
    // even split vote: lowest class
    assert_eq!(knn_predict(&line, &[2, 1], &[0.0], 2).unwrap(), 1);
    assert!(knn_predict(&line, &[2, 1], &[0.0], 3).is_err());
    assert!(knn_predict(&emb(vec![]), &[], &[0.0], 1).is_err());
}

#[test]
fn knn_matches_exhaustive_oracle() {
    let mut rng = rng::stream(5, &[]);
    // coarse grid coordinates so distance ties actually occur
    let train_rows: Vec<Vec<f64>> = (0..80).map(|_| (0..3).map(|_| rng.random_range(0..4) as f64).collect()).collect();
    let labels: Vec<u32> = (0..80).map(|_| rng.random_range(1..=3)).collect();
    let train = emb(train_rows.clone());
    for _ in 0..100 {
        let q: Vec<f64> = (0..3).map(|_| rng.random_range(0..4) as f64).collect();
        let mut all: Vec<(f64, usize)> = train_rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum(), i))
            .collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut votes = [0usize; 4];
        for &(_, i) in &all[..5] {
            votes[labels[i] as usize] += 1;
        }
        let top = *votes.iter().max().unwrap();
        let oracle = (1..4).find(|&c| votes[c] == top).unwrap() as u32;
        assert_eq!(knn_predict(&train, &labels, &q, 5).unwrap(), oracle);
    }
}

fn two_cliques(size: u32) -> (EdgeList, LabelVector) {
    let mut edges = Vec::new();
    for block in 0..2 {
        let off = block * size;
        for i in 0..size {
            for j in (i + 1)..size {
                edges.push(Edge::unit(off + i, off + j));
            }
        }
    }
    let y = (0..2 * size).map(|i| i / size + 1).collect();
    (EdgeList::undirected(2 * size as usize, edges).unwrap(), LabelVector::new(y, 2).unwrap())
}

#[test]
fn cliques_classify_perfectly() {
    let (e, y) = two_cliques(20);
    for name in ["lda", "knn5"] {
        for variant in [Variant::Adjacency, Variant::Laplacian] {
            let clf = classifier_registry();
            let out = kfold_error(&e, &y, 10, clf.get(name).unwrap(), variant, 3).unwrap();
            assert_eq!(out.mean_error, 0.0, "{name} {variant}");
            assert_eq!(out.per_fold.len(), 10);
        }
    }
}

#[test]
fn encoder_never_sees_test_labels() {
    let (e, y) = SbmSpec::balanced(vec![vec![0.2, 0.05], vec![0.05, 0.2]]).unwrap().sample(300, 4).unwrap();
    for fold in stratified_folds(&y, 10, 9).unwrap() {
        let (_, w) = fold_embedding(&e, &y, &fold, Variant::Adjacency).unwrap();
        for &i in &fold.test {
            assert!(w.entry(i).is_none());
            assert!(w.dense_row(i).iter().all(|&v| v == 0.0));
        }
        for &i in &fold.train {
            assert!(w.entry(i).is_some());
        }
    }
}

#[test]
fn fold_configuration_errors() {
    let y = LabelVector::new(vec![1, 1, 1, 2, 2], 2).unwrap();
    assert!(matches!(stratified_folds(&y, 3, 0), Err(GeeError::Config(_))));
    assert!(matches!(stratified_folds(&y, 1, 0), Err(GeeError::Config(_))));
    assert!(stratified_folds(&y, 2, 0).is_ok());
}

proptest! {
    #[test]
    fn folds_partition_labeled_vertices(
        raw in prop::collection::vec(0u32..4, 30..120),
        folds in 2usize..6,
        seed in 0u64..1000,
    ) {
        let y = LabelVector::new(raw, 3).unwrap();
        let mut sizes = [0usize; 3];
        for i in y.known_indices() {
            sizes[y.get(i) as usize - 1] += 1;
        }
        if sizes.iter().any(|&s| s < folds) {
            prop_assert!(stratified_folds(&y, folds, seed).is_err());
            return Ok(());
        }
        let splits = stratified_folds(&y, folds, seed).unwrap();
        let mut seen: Vec<usize> = splits.iter().flat_map(|f| f.test.clone()).collect();
        seen.sort_unstable();
        prop_assert_eq!(&seen, &y.known_indices());
        for f in &splits {
            let mut all: Vec<usize> = f.train.iter().chain(&f.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(&all, &y.known_indices());
            for c in 1..=3u32 {
                let per = f.test.iter().filter(|&&i| y.get(i) == c).count();
                let want = sizes[c as usize - 1] as f64 / folds as f64;
                prop_assert!((per as f64 - want).abs() < 1.0 + 1e-12);
            }
        }
        let lens: Vec<usize> = splits.iter().map(|f| f.test.len()).collect();
        prop_assert!(lens.iter().max().unwrap() - lens.iter().min().unwrap() <= 1);
    }
}

#[test]
fn error_is_invariant_to_vertex_relabeling() {
    let spec = SbmSpec::balanced(vec![vec![0.12, 0.04], vec![0.04, 0.1]]).unwrap();
    let (e, y) = spec.sample(400, 12).unwrap();
    let n = e.n();
    let mut perm: Vec<usize> = (0..n).collect();
    use rand::seq::SliceRandom;
    perm.shuffle(&mut rng::stream(3, &[]));
    let moved: Vec<Edge> = e.edges().iter().map(|x| Edge::new(perm[x.u as usize] as u32, perm[x.v as usize] as u32, x.w)).collect();
    let e2 = EdgeList::undirected(n, moved).unwrap();
    let mut y2 = vec![0u32; n];
    for i in 0..n {
        y2[perm[i]] = y.get(i);
    }
    let y2 = LabelVector::new(y2, 2).unwrap();
    let splits = stratified_folds(&y, 5, 1).unwrap();
    let splits2: Vec<Fold> = splits
        .iter()
        .map(|f| {
            let map = |v: &[usize]| {
                let mut out: Vec<usize> = v.iter().map(|&i| perm[i]).collect();
                out.sort_unstable();
                out
            };
            Fold { train: map(&f.train), test: map(&f.test) }
        })
        .collect();
    let a = kfold_error_with_folds(&e, &y, &splits, &Lda, Variant::Adjacency).unwrap();
    let b = kfold_error_with_folds(&e2, &y2, &splits2, &Lda, Variant::Adjacency).unwrap();
    assert_eq!(a.per_fold, b.per_fold);
}

#[test]
fn report_fields() {
    let (e, y) = two_cliques(10);
    let r = classification_report("cliques", &e, &y, 5, "knn5", Variant::Laplacian, 0).unwrap();
    assert_eq!(r.classifier, "knn5");
    assert_eq!(r.chance_error, 0.5);
    let json = serde_json::to_value(&r).unwrap();
    for key in ["dataset", "variant", "classifier", "folds", "mean_error", "std_error", "per_fold", "chance_error", "wall_time_ms"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    assert!(classification_report("x", &e, &y, 5, "svm", Variant::Laplacian, 0).is_err());
    assert_eq!(best_error(&[r.clone(), ClassificationReport { mean_error: -1.0, ..r }]), Some(-1.0));
}
