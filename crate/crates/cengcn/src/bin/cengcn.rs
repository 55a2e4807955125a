//! Command-line front end: transform, train, eval, sweep, generate, and
//! diagnose, driven by a key=value config file plus flag overrides.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cengcn::config::RunConfig;
use cengcn::pipeline;
use cengcn::Result;

#[derive(Parser)]
#[command(
    name = "cengcn",
    version,
    about = "Centrality-driven graph convolutional networks for scale-free graphs"
)]
struct Cli {
    /// Log more than warnings.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

/// Flag overrides applied on top of the config file. Every flag mirrors a
/// config key.
#[derive(Args, Default)]
struct Overrides {
    /// Path to a key=value configuration file read before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge list file (one `src dst [weight]` per line).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Vertex feature file; identity features when absent.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Label file (one `vertex class` per line).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Field delimiter: one character, `tab`, or `space`.
    #[arg(long)]
    delimiter: Option<String>,
    /// Generate a planted-partition graph with this many vertices.
    #[arg(long)]
    generate_n: Option<usize>,
    /// Edges attached per new vertex during generation.
    #[arg(long)]
    generate_m: Option<usize>,
    /// Number of planted communities.
    #[arg(long)]
    generate_communities: Option<usize>,
    /// Cross-community edge fraction.
    #[arg(long)]
    generate_inter_frac: Option<f64>,
    /// Centrality measure: degree or eigenvector.
    #[arg(long)]
    measure: Option<String>,
    /// Hub fraction in (0, 1); 0.02 selects the top 2%.
    #[arg(long = "r")]
    hub_rate: Option<f64>,
    /// Exponent applied when connected vertices look similar (> 0).
    #[arg(long)]
    p: Option<f64>,
    /// Exponent applied when they look dissimilar (< 0).
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    /// Label propagation steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Variant: full, TD, TE, AD, AE, WD, WE, ID, IE, or gcn.
    #[arg(long)]
    ablation: Option<String>,
    /// Hidden layer widths, comma separated (may be empty for one layer).
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    /// Embedding dimension for embed mode.
    #[arg(long)]
    embed_dim: Option<usize>,
    /// Output head: classify or embed.
    #[arg(long)]
    mode: Option<String>,
    /// Adjacency normalization: row or symmetric.
    #[arg(long)]
    normalization: Option<String>,
    /// Dropout keep probability in (0, 1].
    #[arg(long)]
    dropout_keep: Option<f64>,
    /// L2 penalty on the weights.
    #[arg(long)]
    weight_decay: Option<f64>,
    /// Reconstruction emphasis on edges (> 1).
    #[arg(long)]
    rho: Option<f64>,
    /// Learning rate; defaults per mode.
    #[arg(long)]
    lr: Option<f64>,
    /// Training iterations; defaults per mode.
    #[arg(long)]
    iterations: Option<usize>,
    /// Labeled fraction used for training.
    #[arg(long)]
    train_frac: Option<f64>,
    /// Labeled fraction used for validation.
    #[arg(long)]
    val_frac: Option<f64>,
    /// Edge fraction hidden for link prediction.
    #[arg(long)]
    hide_frac: Option<f64>,
    /// Cluster count for the clustering task; defaults to the class count.
    #[arg(long)]
    clusters: Option<usize>,
    /// Evaluation task: classification, link_prediction, or clustering.
    #[arg(long)]
    task: Option<String>,
    /// Master seed for every random choice in the run.
    #[arg(long)]
    seed: Option<u64>,
    /// Artifact directory; falls back to $CENGCN_OUT_DIR, then `.`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the transformed adjacency and write its files.
    Transform(Overrides),
    /// Train a model; runs the transform stages in-process.
    Train(Overrides),
    /// Evaluate a checkpoint on the configured task.
    Eval {
        #[command(flatten)]
        overrides: Overrides,
        /// Checkpoint written by `train`.
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Train and score once per value of one hyperparameter.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// Parameter to vary: r, p, q, or layers.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        values: Vec<f64>,
    },
    /// Generate a planted-partition scale-free graph.
    Generate(Overrides),
    /// Print the degree distribution and power-law exponent estimate.
    Diagnose(Overrides),
}

fn build_config(o: &Overrides) -> Result<RunConfig> {
    let mut cfg = match &o.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &o.graph {
        cfg.graph = Some(v.clone());
    }
    if let Some(v) = &o.features {
        cfg.features = Some(v.clone());
    }
    if let Some(v) = &o.labels {
        cfg.labels = Some(v.clone());
    }
    if let Some(v) = &o.delimiter {
        cfg.set("delimiter", v)?;
    }
    if let Some(v) = o.generate_n {
        cfg.generate_n = Some(v);
    }
    if let Some(v) = o.generate_m {
        cfg.generate_m = v;
    }
    if let Some(v) = o.generate_communities {
        cfg.generate_communities = v;
    }
    if let Some(v) = o.generate_inter_frac {
        cfg.generate_inter_frac = v;
    }
    if let Some(v) = &o.measure {
        cfg.set("measure", v)?;
    }
    if let Some(v) = o.hub_rate {
        cfg.hub_rate = v;
    }
    if let Some(v) = o.p {
        cfg.p = v;
    }
    if let Some(v) = o.q {
        cfg.q = v;
    }
    if let Some(v) = o.steps {
        cfg.steps = v;
    }
    if let Some(v) = &o.ablation {
        cfg.set("ablation", v)?;
    }
    if let Some(v) = &o.hidden {
        cfg.hidden = v.clone();
    }
    if let Some(v) = o.embed_dim {
        cfg.embed_dim = v;
    }
    if let Some(v) = &o.mode {
        cfg.set("mode", v)?;
    }
    if let Some(v) = &o.normalization {
        cfg.set("normalization", v)?;
    }
    if let Some(v) = o.dropout_keep {
        cfg.dropout_keep = v;
    }
    if let Some(v) = o.weight_decay {
        cfg.weight_decay = v;
    }
    if let Some(v) = o.rho {
        cfg.rho = v;
    }
    if let Some(v) = o.lr {
        cfg.lr = Some(v);
    }
    if let Some(v) = o.iterations {
        cfg.iterations = Some(v);
    }
    if let Some(v) = o.train_frac {
        cfg.train_frac = v;
    }
    if let Some(v) = o.val_frac {
        cfg.val_frac = v;
    }
    if let Some(v) = o.hide_frac {
        cfg.hide_frac = v;
    }
    if let Some(v) = o.clusters {
        cfg.clusters = Some(v);
    }
    if let Some(v) = &o.task {
        cfg.set("task", v)?;
    }
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = &o.output_dir {
        cfg.output_dir = Some(v.clone());
    }
    cfg.finalize()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Transform(o) => {
            let cfg = build_config(&o)?;
            let written = pipeline::run_transform(&cfg)?;
            for path in written {
                println!("wrote {}", path.display());
            }
        }
        Command::Train(o) => {
            let cfg = build_config(&o)?;
            let art = pipeline::run_train(&cfg)?;
            println!("wrote {}", art.checkpoint.display());
            println!("wrote {}", art.history.display());
            if let Some(path) = &art.embeddings {
                println!("wrote {}", path.display());
            }
            let last = art.outcome.history.last().expect("at least one iteration");
            println!("iterations {}", art.outcome.history.len());
            println!("final_loss {}", last.train_loss);
            if let (Some(best), Some(at)) = (art.outcome.best_val, art.outcome.best_iteration) {
                println!("best_val_accuracy {best} (iteration {at})");
            }
        }
        Command::Eval {
            overrides,
            checkpoint,
        } => {
            let cfg = build_config(&overrides)?;
            let report = pipeline::run_eval(&cfg, &checkpoint)?;
            print!("{}", report.pretty());
        }
        Command::Sweep {
            overrides,
            param,
            values,
        } => {
            let cfg = build_config(&overrides)?;
            let path = pipeline::run_sweep(&cfg, &param, &values)?;
            print!("{}", std::fs::read_to_string(&path)?);
            println!("wrote {}", path.display());
        }
        Command::Generate(o) => {
            let cfg = build_config(&o)?;
            let (graph_path, labels_path) = pipeline::run_generate(&cfg)?;
            println!("wrote {}", graph_path.display());
            println!("wrote {}", labels_path.display());
        }
        Command::Diagnose(o) => {
            let cfg = build_config(&o)?;
            print!("{}", pipeline::diagnose_report(&cfg)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
