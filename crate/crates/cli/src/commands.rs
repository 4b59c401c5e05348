use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gee_core::bootstrap::{bootstrap_test, resampler_registry, BootstrapReport};
use gee_core::cluster::{ari, gee_unsup};
use gee_core::encoder::{encode_chunked, encode_with_weights, build_weights};
use gee_core::eval::{best_error, classification_report, classifier_registry};
use gee_core::graph::laplacian_reweight;
use gee_core::io::{self, LoadOptions};
use gee_core::models::{model_from_json, sample_sbm_edges};
use gee_core::{EdgeList, GeeError, LabelVector, Result, Variant};
use serde_json::json;

use crate::report::RunReport;
use crate::{Cli, Command, GraphInput};

/// Largest benchmark size allowed without `--i-have-memory`.
const DESK_LIMIT: u64 = 100_000_000;

pub fn run(cli: &Cli) -> Result<()> {
    let mut report = match &cli.command {
        Command::Embed { graph, labels, variant, out } => embed(graph, labels, *variant, out)?,
        Command::Cluster { graph, k, max_iter, seed, restarts, variant, truth, out, embedding_out } => cluster(
            graph,
            *k as usize,
            *max_iter as usize,
            *seed,
            *restarts as usize,
            *variant,
            truth.as_deref(),
            out,
            embedding_out.as_deref(),
        )?,
        Command::Classify { graph, labels, folds, classifier, variant, seed, dataset, out } => {
            classify(graph, labels, *folds as usize, classifier, *variant, *seed, dataset.as_deref(), out.as_deref())?
        }
        Command::Generate { model, n, seed, out_prefix } => generate(model, *n, *seed, out_prefix)?,
        Command::Bootstrap { graph, labels, n2, seed, permutations, naive, out, out_labels } => bootstrap(
            graph,
            labels,
            *n2 as usize,
            *seed,
            *permutations,
            *naive,
            out,
            out_labels.as_deref(),
        )?,
        Command::Bench { k, avg_degree, edges_from, edges_to, replicates, variant, seed, i_have_memory, out } => bench(
            *k as usize,
            *avg_degree,
            *edges_from,
            *edges_to,
            *replicates as usize,
            *variant,
            *seed,
            *i_have_memory,
            out.as_deref(),
            cli.json,
        )?,
    };
    report.param("threads", rayon::current_num_threads());
    report.finish();
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
    } else {
        eprint!("{}", report.human());
    }
    Ok(())
}

fn graph_params(report: &mut RunReport, g: &GraphInput) {
    report
        .param("edges", g.edges.display().to_string())
        .param("directed", g.directed)
        .param("one_based", g.one_based);
}

fn load_graph(report: &mut RunReport, g: &GraphInput) -> Result<EdgeList> {
    graph_params(report, g);
    let opts = LoadOptions { one_based: g.one_based, directed: g.directed };
    report.time("load", || io::load_edgelist(&g.edges, opts))
}

/// Loads labels and reconciles their length with the graph: extra labels
/// extend the vertex set, missing trailing labels count as unknown.
fn load_graph_and_labels(report: &mut RunReport, g: &GraphInput, labels: &Path) -> Result<(EdgeList, LabelVector)> {
    let edges = load_graph(report, g)?;
    report.param("labels", labels.display().to_string());
    let y = report.time("load", || io::load_labels(labels))?;
    let n = edges.n().max(y.len());
    Ok((edges.with_vertex_count(n)?, y.padded(n)))
}

fn threads() -> usize {
    rayon::current_num_threads()
}

fn embed(g: &GraphInput, labels: &Path, variant: Variant, out: &Path) -> Result<RunReport> {
    let mut report = RunReport::new("embed");
    let (edges, y) = load_graph_and_labels(&mut report, g, labels)?;
    report.param("variant", variant).param("out", out.display().to_string());
    let edges = match variant {
        Variant::Adjacency => edges,
        Variant::Laplacian => report.time("reweight", || laplacian_reweight(&edges))?,
    };
    let z = report.time("encode", || -> Result<_> {
        let w = build_weights(&y)?;
        if threads() > 1 {
            Ok(encode_chunked(&edges, &y, Variant::Adjacency, threads())?.0)
        } else {
            encode_with_weights(&edges, &w, Variant::Adjacency)
        }
    })?;
    report.time("write", || io::save_embedding_csv(out, &z))?;
    report.output(out);
    report.result("vertices", z.n()).result("classes", z.k()).result("edge_count", edges.len());
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn cluster(
    g: &GraphInput,
    k: usize,
    max_iter: usize,
    seed: u64,
    restarts: usize,
    variant: Variant,
    truth: Option<&Path>,
    out: &Path,
    embedding_out: Option<&Path>,
) -> Result<RunReport> {
    let mut report = RunReport::new("cluster");
    let edges = load_graph(&mut report, g)?;
    report
        .param("k", k)
        .param("max_iter", max_iter)
        .param("seed", seed)
        .param("restarts", restarts)
        .param("variant", variant)
        .param("out", out.display().to_string());
    let truth = match truth {
        Some(p) => {
            report.param("truth", p.display().to_string());
            Some(report.time("load", || io::load_labels(p))?)
        }
        None => None,
    };
    let result = report.time("cluster", || gee_unsup(&edges, k, max_iter, seed, variant, restarts))?;
    report.time("write", || io::write_labels(out, result.labels.as_slice()))?;
    report.output(out);
    if let Some(p) = embedding_out {
        io::save_embedding_csv(p, &result.embedding)?;
        report.output(p);
    }
    report.result("iterations", result.iterations).result("converged", result.converged);
    if let Some(t) = truth {
        if t.len() != edges.n() {
            return Err(GeeError::Domain(format!(
                "truth labels cover {} vertices, graph has {}",
                t.len(),
                edges.n()
            )));
        }
        let known = t.known_indices();
        let a: Vec<u32> = known.iter().map(|&i| t.get(i)).collect();
        let b: Vec<u32> = known.iter().map(|&i| result.labels.get(i)).collect();
        report.result("ari", ari(&a, &b)?);
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn classify(
    g: &GraphInput,
    labels: &Path,
    folds: usize,
    classifier: &str,
    variant: Variant,
    seed: u64,
    dataset: Option<&str>,
    out: Option<&Path>,
) -> Result<RunReport> {
    let mut report = RunReport::new("classify");
    let (edges, y) = load_graph_and_labels(&mut report, g, labels)?;
    let names: Vec<&str> = match classifier {
        "both" => vec!["lda", "knn5"],
        one => {
            classifier_registry().get(one)?;
            vec![one]
        }
    };
    let dataset = dataset.map(str::to_string).unwrap_or_else(|| {
        g.edges.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    });
    report
        .param("folds", folds)
        .param("classifier", classifier)
        .param("variant", variant)
        .param("seed", seed)
        .param("dataset", &dataset);
    let reports = report.time("classify", || {
        names
            .iter()
            .map(|c| classification_report(&dataset, &edges, &y, folds, c, variant, seed))
            .collect::<Result<Vec<_>>>()
    })?;
    let best = best_error(&reports);
    let body = json!({ "reports": reports, "min_error": best });
    if let Some(p) = out {
        write_json(p, &body)?;
        report.output(p);
    }
    for r in &reports {
        report.result(&format!("{}_mean_error", r.classifier), r.mean_error);
    }
    report.result("chance_error", reports[0].chance_error).result("min_error", best).result("reports", &reports);
    Ok(report)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    io::atomic_write(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        writeln!(out)
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn generate(model: &Path, n: usize, seed: u64, prefix: &Path) -> Result<RunReport> {
    let mut report = RunReport::new("generate");
    report
        .param("model", model.display().to_string())
        .param("n", n)
        .param("seed", seed)
        .param("out_prefix", prefix.display().to_string());
    let text = std::fs::read_to_string(model).map_err(|e| GeeError::Io { path: model.to_path_buf(), source: e })?;
    let m = model_from_json(&text)?;
    report.param("model_name", m.name());
    let g = report.time("generate", || m.sample(n, seed))?;
    let edges_path = with_suffix(prefix, ".edges");
    let labels_path = with_suffix(prefix, ".labels");
    report.time("write", || -> Result<()> {
        io::write_edgelist(&edges_path, &g.edges)?;
        io::write_labels(&labels_path, g.labels.as_slice())
    })?;
    report.output(&edges_path);
    report.output(&labels_path);
    if let Some(theta) = &g.theta {
        let p = with_suffix(prefix, ".theta");
        io::write_vectors(&p, &theta.iter().map(|&t| vec![t]).collect::<Vec<_>>())?;
        report.output(&p);
    }
    if let Some(x) = &g.latents {
        let p = with_suffix(prefix, ".latents");
        io::write_vectors(&p, x)?;
        report.output(&p);
    }
    report
        .result("vertices", g.edges.n())
        .result("edge_count", g.edges.len())
        .result("mean_degree", g.edges.mean_degree())
        .result("clipped", g.clipped);
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn bootstrap(
    g: &GraphInput,
    labels: &Path,
    n2: usize,
    seed: u64,
    permutations: usize,
    naive: bool,
    out: &Path,
    out_labels: Option<&Path>,
) -> Result<RunReport> {
    let mut report = RunReport::new("bootstrap");
    let (edges, y) = load_graph_and_labels(&mut report, g, labels)?;
    let method = if naive { "naive" } else { "gee" };
    report
        .param("n2", n2)
        .param("seed", seed)
        .param("permutations", permutations)
        .param("method", method)
        .param("out", out.display().to_string());
    let registry = resampler_registry();
    let result = report.time("bootstrap", || bootstrap_test(registry.get(method)?, &edges, &y, n2, seed, permutations))?;
    let labels_out = out_labels.map(Path::to_path_buf).unwrap_or_else(|| out.with_extension("labels"));
    report.time("write", || -> Result<()> {
        io::write_edgelist(out, &result.resample.edges)?;
        io::write_labels(&labels_out, result.resample.labels.as_slice())
    })?;
    report.output(out);
    report.output(&labels_out);
    let summary = BootstrapReport::new(method, &edges, &result, seed);
    report.result("bootstrap", summary);
    Ok(report)
}

fn bench_sizes(from: u64, to: u64) -> Vec<u64> {
    let mut sizes = Vec::new();
    let mut s = from;
    if s == 0 {
        sizes.push(0);
        s = 1000;
    }
    while s <= to {
        sizes.push(s);
        match s.checked_mul(10) {
            Some(next) => s = next,
            None => break,
        }
    }
    sizes
}

#[allow(clippy::too_many_arguments)]
fn bench(
    k: usize,
    avg_degree: f64,
    from: u64,
    to: u64,
    replicates: usize,
    variant: Variant,
    seed: u64,
    i_have_memory: bool,
    out: Option<&Path>,
    json: bool,
) -> Result<RunReport> {
    if to > DESK_LIMIT && !i_have_memory {
        return Err(GeeError::Config(format!(
            "--edges-to {to} exceeds the desk limit of {DESK_LIMIT} edges; pass --i-have-memory to go further"
        )));
    }
    if from > to {
        return Err(GeeError::Config(format!("--edges-from {from} is larger than --edges-to {to}")));
    }
    if !(avg_degree > 0.0) {
        return Err(GeeError::Config("--avg-degree must be positive".into()));
    }
    let mut report = RunReport::new("bench");
    report
        .param("k", k)
        .param("avg_degree", avg_degree)
        .param("edges_from", from)
        .param("edges_to", to)
        .param("replicates", replicates)
        .param("variant", variant)
        .param("seed", seed);
    let mut rows = vec!["edges,vertices,median_ms,min_ms,max_ms,ratio_to_previous,edges_per_second".to_string()];
    let mut previous: Option<f64> = None;
    let mut table = Vec::new();
    for (step, &s) in bench_sizes(from, to).iter().enumerate() {
        let n = ((2.0 * s as f64 / avg_degree).round() as usize).max(k).max(2);
        // generation is outside the timed region
        let (edges, labels) = report.time("generate", || -> Result<_> {
            // every edge probability is equal, so round-robin labels lose nothing and keep all K classes present
            let y = LabelVector::new((0..n).map(|i| (i % k) as u32 + 1).collect(), k)?;
            let e = if s == 0 {
                EdgeList::empty(n)
            } else {
                let p = (avg_degree / (n - 1) as f64).min(1.0);
                sample_sbm_edges(&vec![vec![p; k]; k], &y, gee_core::rng::derive(seed, &[step as u64, 1]))
            };
            Ok((e, y))
        })?;
        let mut times = Vec::with_capacity(replicates);
        for _ in 0..replicates {
            let start = Instant::now();
            let z = encode_chunked(&edges, &labels, variant, threads())?;
            times.push(start.elapsed().as_secs_f64() * 1e3);
            std::hint::black_box(z);
        }
        *report.phases_ms.entry("encode".into()).or_default() += times.iter().sum::<f64>();
        times.sort_by(f64::total_cmp);
        let median = if times.len() % 2 == 1 {
            times[times.len() / 2]
        } else {
            0.5 * (times[times.len() / 2 - 1] + times[times.len() / 2])
        };
        let ratio = previous.filter(|&p| p > 0.0).map(|p| median / p);
        previous = Some(median);
        rows.push(format!(
            "{},{},{:.4},{:.4},{:.4},{},{:.0}",
            edges.len(),
            n,
            median,
            times[0],
            times[times.len() - 1],
            ratio.map(|r| format!("{r:.2}")).unwrap_or_default(),
            if median > 0.0 { edges.len() as f64 / (median / 1e3) } else { 0.0 }
        ));
        table.push(json!({ "edges": edges.len(), "vertices": n, "median_ms": median, "ratio_to_previous": ratio }));
        eprintln!("bench: {} edges, median {median:.3} ms", edges.len());
    }
    let csv = rows.join("\n") + "\n";
    match out {
        Some(p) => {
            io::atomic_write(p, |w| w.write_all(csv.as_bytes()))?;
            report.output(p);
        }
        // with --json, stdout carries the report and the table lives in its results
        None if !json => print!("{csv}"),
        None => {}
    }
    report.result("table", table);
    Ok(report)
}
