//! `gee`: command-line front end for the graph encoder embedding engine.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gee_core::Variant;

#[derive(Parser, Debug)]
#[command(name = "gee", version, about = "Linear-time one-hot graph encoder embedding")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "GEE_THREADS")]
    pub threads: Option<usize>,
    /// Print the run report as JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GraphInput {
    /// Edgelist file: `u v [w]` per line.
    #[arg(long)]
    pub edges: PathBuf,
    /// Treat edges as directed.
    #[arg(long)]
    pub directed: bool,
    /// Vertex ids in the edgelist start at 1.
    #[arg(long)]
    pub one_based: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Embed a graph given (partial) labels; writes CSV.
    Embed {
        #[command(flatten)]
        graph: GraphInput,
        /// One integer label per vertex; 0 or negative means unknown.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value = "aee")]
        variant: Variant,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cluster vertices without labels.
    Cluster {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(1..))]
        max_iter: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// k-means restarts per iteration.
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
        restarts: u32,
        #[arg(long, default_value = "aee")]
        variant: Variant,
        /// Ground-truth labels; when given, the ARI is reported.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Where to write the cluster labels.
        #[arg(long)]
        out: PathBuf,
        /// Also write the final embedding as CSV.
        #[arg(long)]
        embedding_out: Option<PathBuf>,
    },
    /// k-fold vertex classification error.
    Classify {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(2..))]
        folds: u32,
        /// lda, knn5 or both.
        #[arg(long, default_value = "both")]
        classifier: String,
        #[arg(long, default_value = "aee")]
        variant: Variant,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Name recorded in the report (defaults to the edgelist file stem).
        #[arg(long)]
        dataset: Option<String>,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a graph from a JSON model document.
    Generate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Writes <prefix>.edges, <prefix>.labels and, where the model has them,
        /// <prefix>.theta and <prefix>.latents.
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Resample a labeled graph and test it against the original.
    Bootstrap {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        n2: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        permutations: usize,
        /// Induced-subgraph resampling instead of the encoder bootstrap.
        #[arg(long)]
        naive: bool,
        /// Resampled edgelist.
        #[arg(long)]
        out: PathBuf,
        /// Resampled labels (defaults to the edgelist path with a .labels extension).
        #[arg(long)]
        out_labels: Option<PathBuf>,
    },
    /// Time the encoder on random graphs of growing size.
    Bench {
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        #[arg(long, default_value_t = 100.0)]
        avg_degree: f64,
        #[arg(long, default_value = "1e3", value_parser = parse_count)]
        edges_from: u64,
        #[arg(long, default_value = "1e8", value_parser = parse_count)]
        edges_to: u64,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
        replicates: u32,
        #[arg(long, default_value = "aee")]
        variant: Variant,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Allow sizes above 10^8 edges.
        #[arg(long)]
        i_have_memory: bool,
        /// Timing table CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Accepts integers and scientific notation such as `1e6`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if !(x >= 0.0 && x.fract() == 0.0 && x < 1.8e19) {
        return Err(format!("{s:?} is not a non-negative whole number"));
    }
    Ok(x as u64)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
