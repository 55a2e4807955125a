//! End-to-end orchestration: each CLI command maps to one function here
//! that chains the pipeline stages, writes run artifacts, and echoes a
//! manifest sufficient to reproduce the run bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::centrality::CentralityProfile;
use crate::config::{RunConfig, DEFAULT_P, DEFAULT_Q};
use crate::engine::{
    forward, normalize, one_hot, train, AttentionSupport, Model, ModelConfig, OutputMode, Phase,
    ReconstructionTarget, TrainConfig, TrainOutcome, TrainTask, EARLY_STOP_REL_TOL,
    EARLY_STOP_WINDOW,
};
use crate::error::{Error, Result};
use crate::eval::{
    accuracy, auc, export_embeddings, hadamard_edge_features, kmeans, nmi, EvalReport, EvalTask,
    LogisticRegression, KMEANS_RESTARTS,
};
use crate::graph::{
    estimate_power_law_alpha, generate_planted_partition, identity_features, load_edge_list,
    load_features, load_labels, sample_link_split, split_vertices,
    FeatureMatrix, Graph, LabelVector, LinkSplit,
};
use crate::labelprop::{propagate, similarity_sign, SimilaritySign, TransitionMatrix};
use crate::transform::TransformedAdjacency;

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const TRANSFORM_EDGES_FILE: &str = "transformed_edges.txt";
pub const TRANSFORM_DIAG_FILE: &str = "transformed_diag.txt";
pub const PROFILE_FILE: &str = "centrality_profile.txt";
pub const SIGNS_FILE: &str = "similarity_signs.txt";
pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const HISTORY_FILE: &str = "history.csv";
pub const EMBEDDINGS_FILE: &str = "embeddings.txt";
pub const REPORT_FILE: &str = "report.csv";
pub const ASSIGNMENTS_FILE: &str = "cluster_assignments.txt";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const GENERATED_GRAPH_FILE: &str = "generated_graph.txt";
pub const GENERATED_LABELS_FILE: &str = "generated_labels.txt";

/// Learning rate and iteration budget for the link-prediction edge
/// classifier (logistic regression on Hadamard features).
pub const LINK_LOGISTIC_LR: f64 = 0.1;
pub const LINK_LOGISTIC_ITERS: usize = 500;
/// Seed offset separating the classifier's half-split shuffle from the
/// edge-hiding split.
const LINK_NEG_SALT: u64 = 0x6e65_675f;

/// Graph, features, and optional labels after loading or generation.
pub struct PreparedData {
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub labels: Option<LabelVector>,
}

pub fn prepare_data(cfg: &RunConfig) -> Result<PreparedData> {
    if let Some(n) = cfg.generate_n {
        let (graph, labels) = generate_planted_partition(
            n,
            cfg.generate_communities,
            cfg.generate_m,
            cfg.generate_inter_frac,
            cfg.seed,
        )
        .map_err(|e| e.in_stage("generate"))?;
        let features = identity_features(graph.n());
        return Ok(PreparedData {
            graph,
            features,
            labels: Some(labels),
        });
    }
    let path = cfg
        .graph
        .as_deref()
        .ok_or_else(|| Error::config("no graph input configured"))?;
    let report = load_edge_list(path, cfg.delimiter).map_err(|e| e.in_stage("load graph"))?;
    let graph = report.graph;
    let features = match &cfg.features {
        Some(p) => {
            load_features(p, cfg.delimiter, graph.n()).map_err(|e| e.in_stage("load features"))?
        }
        None => identity_features(graph.n()),
    };
    let labels = match &cfg.labels {
        Some(p) => {
            Some(load_labels(p, cfg.delimiter, graph.n()).map_err(|e| e.in_stage("load labels"))?)
        }
        None => None,
    };
    Ok(PreparedData {
        graph,
        features,
        labels,
    })
}

/// The adjacency the engine convolves over plus the stage outputs that
/// produced it. `profile`/`signs` are None for the variants that skip the
/// corresponding stage.
pub struct AdjacencyArtifacts {
    pub adjacency: TransformedAdjacency,
    pub profile: Option<CentralityProfile>,
    pub signs: Option<SimilaritySign>,
    pub hubs: Vec<usize>,
}

pub fn build_adjacency(cfg: &RunConfig, graph: &Graph) -> Result<AdjacencyArtifacts> {
    match cfg.ablation.transform_kind() {
        Some(kind) => {
            let profile =
                CentralityProfile::compute(graph, cfg.resolved_measure(), cfg.hub_percent())
                    .map_err(|e| e.in_stage("centrality"))?;
            let transition = TransitionMatrix::build(graph);
            let labels = propagate(&transition, &profile.hubs, cfg.steps)
                .map_err(|e| e.in_stage("labelprop"))?;
            let signs = similarity_sign(graph, &labels, &profile.hubs)
                .map_err(|e| e.in_stage("labelprop"))?;
            let adjacency =
                crate::transform::transform_graph(graph, &profile, &signs, cfg.p, cfg.q, kind)
                    .map_err(|e| e.in_stage("transform"))?;
            let hubs = profile.hubs.clone();
            Ok(AdjacencyArtifacts {
                adjacency,
                profile: Some(profile),
                signs: Some(signs),
                hubs,
            })
        }
        None => {
            if cfg.p != DEFAULT_P || cfg.q != DEFAULT_Q {
                log::warn!(
                    "ablation {} skips the transform; p = {} and q = {} are ignored",
                    cfg.ablation,
                    cfg.p,
                    cfg.q
                );
            }
            let adjacency = TransformedAdjacency::identity_plus(graph);
            let (profile, hubs) = if cfg.ablation.attention_enabled() {
                let profile =
                    CentralityProfile::compute(graph, cfg.resolved_measure(), cfg.hub_percent())
                        .map_err(|e| e.in_stage("centrality"))?;
                let hubs = profile.hubs.clone();
                (Some(profile), hubs)
            } else {
                (None, Vec::new())
            };
            Ok(AdjacencyArtifacts {
                adjacency,
                profile,
                signs: None,
                hubs,
            })
        }
    }
}

fn ensure_output_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.resolved_output_dir().to_path_buf();
    fs::create_dir_all(&dir)
        .map_err(|e| Error::Io(format!("creating {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_manifest(cfg: &RunConfig, command: &str, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(MANIFEST_FILE);
    let text = format!(
        "# cengcn run manifest v1\n# command: {command}\n{}",
        cfg.manifest()
    );
    fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn config_echo(cfg: &RunConfig) -> Vec<(String, String)> {
    vec![
        ("ablation".to_string(), cfg.ablation.to_string()),
        ("measure".to_string(), cfg.resolved_measure().to_string()),
        ("hub_rate".to_string(), cfg.hub_rate.to_string()),
        ("p".to_string(), cfg.p.to_string()),
        ("q".to_string(), cfg.q.to_string()),
        ("mode".to_string(), cfg.mode.to_string()),
    ]
}

/// Run centrality, label propagation, and the weighted transform; write the
/// edge list, diagonal, centrality profile, sign dump, and manifest.
pub fn run_transform(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let data = prepare_data(cfg)?;
    let art = build_adjacency(cfg, &data.graph)?;
    let dir = ensure_output_dir(cfg)?;
    let mut written = Vec::new();
    let edges = dir.join(TRANSFORM_EDGES_FILE);
    let diag = dir.join(TRANSFORM_DIAG_FILE);
    art.adjacency.write_files(&edges, &diag)?;
    written.push(edges);
    written.push(diag);
    if let Some(profile) = &art.profile {
        let path = dir.join(PROFILE_FILE);
        profile.write_text(&path)?;
        written.push(path);
    }
    if let Some(signs) = &art.signs {
        let path = dir.join(SIGNS_FILE);
        signs.write_text(&path)?;
        written.push(path);
    }
    written.push(write_manifest(cfg, "transform", &dir)?);
    Ok(written)
}

/// Trained model plus the artifact paths the run produced.
pub struct TrainArtifacts {
    pub outcome: TrainOutcome,
    pub checkpoint: PathBuf,
    pub history: PathBuf,
    pub embeddings: Option<PathBuf>,
}

struct TrainedRun {
    outcome: TrainOutcome,
    a_norm: Array2<f64>,
    support: Option<AttentionSupport>,
    data: PreparedData,
    link_split: Option<LinkSplit>,
}

/// Shared train path: resolves the working graph (residual for
/// link-prediction embeddings so held-out edges never reach training),
/// builds the adjacency, and optimizes.
fn train_in_memory(cfg: &RunConfig) -> Result<TrainedRun> {
    let data = prepare_data(cfg)?;
    let link_split = if cfg.mode == OutputMode::Embed && cfg.task == EvalTask::LinkPrediction {
        Some(
            sample_link_split(&data.graph, cfg.hide_frac, cfg.seed)
                .map_err(|e| e.in_stage("link split"))?,
        )
    } else {
        None
    };
    let work_graph = link_split
        .as_ref()
        .map(|s| &s.residual)
        .unwrap_or(&data.graph);
    let art = build_adjacency(cfg, work_graph)?;
    let a_norm = normalize(&art.adjacency, cfg.normalization);
    let support = if cfg.ablation.attention_enabled() {
        Some(AttentionSupport::build(work_graph, &art.hubs))
    } else {
        None
    };

    let train_cfg = TrainConfig {
        lr: cfg.resolved_lr(),
        max_iters: cfg.resolved_iterations(),
        weight_decay: cfg.weight_decay,
        stop_window: EARLY_STOP_WINDOW,
        stop_rel_tol: EARLY_STOP_REL_TOL,
    };
    let outcome = match cfg.mode {
        OutputMode::Classify => {
            let labels = data
                .labels
                .as_ref()
                .ok_or_else(|| Error::config("classification training requires labels"))?;
            let split = split_vertices(labels, cfg.train_frac, cfg.val_frac, cfg.seed)
                .map_err(|e| e.in_stage("split"))?;
            let y = one_hot(&labels.y, labels.classes);
            let model = Model::init(ModelConfig {
                input_dim: data.features.dim(),
                widths: cfg.widths(labels.classes),
                attention: cfg.ablation.attention_enabled(),
                mode: OutputMode::Classify,
                dropout_keep: cfg.dropout_keep,
                seed: cfg.seed,
            })?;
            let task = TrainTask::Classify {
                y: &y,
                labels: &labels.y,
                train: &split.train,
                val: &split.validation,
            };
            train(
                model,
                &data.features.x,
                &a_norm,
                support.as_ref(),
                &task,
                &train_cfg,
            )
            .map_err(|e| e.in_stage("training"))?
        }
        OutputMode::Embed => {
            let recon = ReconstructionTarget::build(work_graph, cfg.rho)?;
            let model = Model::init(ModelConfig {
                input_dim: data.features.dim(),
                widths: cfg.widths(0),
                attention: cfg.ablation.attention_enabled(),
                mode: OutputMode::Embed,
                dropout_keep: cfg.dropout_keep,
                seed: cfg.seed,
            })?;
            let task = TrainTask::Embed { recon: &recon };
            train(
                model,
                &data.features.x,
                &a_norm,
                support.as_ref(),
                &task,
                &train_cfg,
            )
            .map_err(|e| e.in_stage("training"))?
        }
    };
    Ok(TrainedRun {
        outcome,
        a_norm,
        support,
        data,
        link_split,
    })
}

/// Train per the configuration and write checkpoint, history, manifest,
/// and (for embeddings) the coordinate dump.
pub fn run_train(cfg: &RunConfig) -> Result<TrainArtifacts> {
    let run = train_in_memory(cfg)?;
    let dir = ensure_output_dir(cfg)?;
    let checkpoint = dir.join(CHECKPOINT_FILE);
    run.outcome.model.save(&checkpoint)?;
    let history = dir.join(HISTORY_FILE);
    fs::write(&history, crate::engine::history_csv(&run.outcome.history))
        .map_err(|e| Error::Io(format!("{}: {e}", history.display())))?;
    let embeddings = if cfg.mode == OutputMode::Embed {
        let (z, _) = forward(
            &run.outcome.model,
            &run.data.features.x,
            &run.a_norm,
            run.support.as_ref(),
            Phase::Eval,
        )?;
        let path = dir.join(EMBEDDINGS_FILE);
        export_embeddings(&z, &path)?;
        Some(path)
    } else {
        None
    };
    write_manifest(cfg, "train", &dir)?;
    Ok(TrainArtifacts {
        outcome: run.outcome,
        checkpoint,
        history,
        embeddings,
    })
}

fn score_link_prediction(cfg: &RunConfig, split: &LinkSplit, z: &Array2<f64>) -> Result<f64> {
    // The hidden edges and the sampled non-edges are each shuffled and
    // halved: the first halves train the edge classifier, the second
    // halves are scored. The shuffle is seeded so the train and eval
    // commands reconstruct the same division.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(LINK_NEG_SALT));
    let mut positives = split.positives.clone();
    let mut negatives = split.negatives.clone();
    positives.shuffle(&mut rng);
    negatives.shuffle(&mut rng);
    let p_half = positives.len() / 2;
    let n_half = negatives.len() / 2;
    if p_half == 0 || n_half == 0 {
        return Err(Error::data(format!(
            "link split too small for the edge classifier: {} positives, {} negatives",
            positives.len(),
            negatives.len()
        )));
    }

    let mut fit_pairs: Vec<(usize, usize)> = positives[..p_half].to_vec();
    fit_pairs.extend_from_slice(&negatives[..n_half]);
    let mut fit_labels = vec![1usize; p_half];
    fit_labels.resize(fit_pairs.len(), 0);
    let features = hadamard_edge_features(z, &fit_pairs)?;
    let classifier =
        LogisticRegression::fit(&features, &fit_labels, LINK_LOGISTIC_LR, LINK_LOGISTIC_ITERS)
            .map_err(|e| e.in_stage("edge classifier"))?;

    let mut eval_pairs: Vec<(usize, usize)> = positives[p_half..].to_vec();
    eval_pairs.extend_from_slice(&negatives[n_half..]);
    let mut eval_labels = vec![1usize; positives.len() - p_half];
    eval_labels.resize(eval_pairs.len(), 0);
    let scores = classifier.predict(&hadamard_edge_features(z, &eval_pairs)?);
    auc(&scores, &eval_labels)
}

fn clustering_truth(labels: &Option<LabelVector>) -> Result<(&LabelVector, &[usize])> {
    let labels = labels
        .as_ref()
        .ok_or_else(|| Error::config("clustering evaluation requires labels for the NMI score"))?;
    Ok((labels, &labels.mask))
}

fn score_clustering(
    cfg: &RunConfig,
    labels: &Option<LabelVector>,
    z: &Array2<f64>,
) -> Result<(f64, Vec<usize>)> {
    let (truth, mask) = clustering_truth(labels)?;
    let k = cfg.clusters.unwrap_or(truth.classes);
    let result = kmeans(z, k, cfg.seed, KMEANS_RESTARTS)?;
    let a: Vec<usize> = mask.iter().map(|&i| truth.y[i]).collect();
    let b: Vec<usize> = mask.iter().map(|&i| result.assignment[i]).collect();
    Ok((nmi(&a, &b)?, result.assignment))
}

/// Evaluate a checkpoint on the configured task and write the report (plus
/// the cluster assignment file for clustering).
pub fn run_eval(cfg: &RunConfig, checkpoint: &Path) -> Result<EvalReport> {
    let model = Model::load(checkpoint)?;
    let needed = match cfg.task {
        EvalTask::Classification => OutputMode::Classify,
        EvalTask::LinkPrediction | EvalTask::Clustering => OutputMode::Embed,
    };
    if model.config.mode != needed {
        return Err(Error::config(format!(
            "task {} needs a {} checkpoint but {} is a {} model",
            cfg.task,
            needed,
            checkpoint.display(),
            model.config.mode
        )));
    }
    let data = prepare_data(cfg)?;
    let link_split = if cfg.task == EvalTask::LinkPrediction {
        Some(
            sample_link_split(&data.graph, cfg.hide_frac, cfg.seed)
                .map_err(|e| e.in_stage("link split"))?,
        )
    } else {
        None
    };
    let work_graph = link_split
        .as_ref()
        .map(|s| &s.residual)
        .unwrap_or(&data.graph);
    let art = build_adjacency(cfg, work_graph)?;
    let a_norm = normalize(&art.adjacency, cfg.normalization);
    let support = if cfg.ablation.attention_enabled() {
        Some(AttentionSupport::build(work_graph, &art.hubs))
    } else {
        None
    };
    let (z, _) = forward(&model, &data.features.x, &a_norm, support.as_ref(), Phase::Eval)
        .map_err(|e| e.in_stage("evaluation"))?;

    let dir = ensure_output_dir(cfg)?;
    let report = match cfg.task {
        EvalTask::Classification => {
            let labels = data
                .labels
                .as_ref()
                .ok_or_else(|| Error::config("classification evaluation requires labels"))?;
            let split = split_vertices(labels, cfg.train_frac, cfg.val_frac, cfg.seed)
                .map_err(|e| e.in_stage("split"))?;
            let acc = accuracy(&z, &labels.y, &split.test)?;
            EvalReport::new(
                EvalTask::Classification,
                "accuracy",
                acc,
                cfg.seed,
                config_echo(cfg),
            )?
        }
        EvalTask::LinkPrediction => {
            let split = link_split.as_ref().expect("built above");
            let auc_value = score_link_prediction(cfg, split, &z)?;
            EvalReport::new(
                EvalTask::LinkPrediction,
                "auc",
                auc_value,
                cfg.seed,
                config_echo(cfg),
            )?
        }
        EvalTask::Clustering => {
            let (score, assignment) = score_clustering(cfg, &data.labels, &z)?;
            let mut text = String::new();
            for (i, c) in assignment.iter().enumerate() {
                writeln!(text, "{i} {c}").expect("string write");
            }
            let path = dir.join(ASSIGNMENTS_FILE);
            fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            EvalReport::new(EvalTask::Clustering, "nmi", score, cfg.seed, config_echo(cfg))?
        }
    };
    report.write_csv(&dir.join(REPORT_FILE))?;
    write_manifest(cfg, "eval", &dir)?;
    Ok(report)
}

/// Train one configuration without touching the filesystem; returns the
/// final-layer vertex representations (class scores or embeddings, one
/// row per vertex) together with the task metric.
pub fn train_outputs(cfg: &RunConfig) -> Result<(Array2<f64>, f64)> {
    let run = train_in_memory(cfg)?;
    let (z, _) = forward(
        &run.outcome.model,
        &run.data.features.x,
        &run.a_norm,
        run.support.as_ref(),
        Phase::Eval,
    )?;
    let metric = match cfg.mode {
        OutputMode::Classify => {
            let labels = run
                .data
                .labels
                .as_ref()
                .ok_or_else(|| Error::config("classification scoring requires labels"))?;
            let split = split_vertices(labels, cfg.train_frac, cfg.val_frac, cfg.seed)
                .map_err(|e| e.in_stage("split"))?;
            accuracy(&z, &labels.y, &split.test)?
        }
        OutputMode::Embed => match cfg.task {
            EvalTask::LinkPrediction => {
                let split = run.link_split.as_ref().expect("embed link task splits");
                score_link_prediction(cfg, split, &z)?
            }
            EvalTask::Clustering => score_clustering(cfg, &run.data.labels, &z)?.0,
            EvalTask::Classification => {
                return Err(Error::config(
                    "task classification does not apply to an embedding model",
                ))
            }
        },
    };
    Ok((z, metric))
}

/// Train and score one configuration without touching the filesystem;
/// returns the task metric. Used by sweeps and benchmark harnesses.
pub fn train_and_score(cfg: &RunConfig) -> Result<f64> {
    train_outputs(cfg).map(|(_, metric)| metric)
}

pub const SWEEP_PARAMS: [&str; 4] = ["r", "p", "q", "layers"];

fn apply_sweep_value(cfg: &mut RunConfig, param: &str, value: f64) -> Result<()> {
    match param {
        "r" => cfg.hub_rate = value,
        "p" => cfg.p = value,
        "q" => cfg.q = value,
        "layers" => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::config(format!(
                    "layers must be a positive integer, got {value}"
                )));
            }
            let width = cfg.hidden.first().copied().unwrap_or(16);
            cfg.hidden = vec![width; value as usize - 1];
        }
        other => {
            return Err(Error::config(format!(
                "unknown sweep parameter '{other}' (expected one of {})",
                SWEEP_PARAMS.join(", ")
            )))
        }
    }
    cfg.finalize_with_env(None)
}

/// One full train+score per value, all points sharing the base seed so the
/// curve isolates the parameter. Writes `sweep.csv` and the manifest.
pub fn run_sweep(cfg: &RunConfig, param: &str, values: &[f64]) -> Result<PathBuf> {
    if values.is_empty() {
        return Err(Error::config("sweep needs at least one value"));
    }
    let mut csv = String::from("param,value,metric,seed\n");
    for &value in values {
        let mut point = cfg.clone();
        apply_sweep_value(&mut point, param, value)?;
        let metric = train_and_score(&point)
            .map_err(|e| e.in_stage(&format!("sweep {param} = {value}")))?;
        writeln!(csv, "{param},{value},{metric},{}", point.seed).expect("string write");
    }
    let dir = ensure_output_dir(cfg)?;
    let path = dir.join(SWEEP_FILE);
    fs::write(&path, csv).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_manifest(cfg, "sweep", &dir)?;
    Ok(path)
}

/// Generate a planted-partition graph and write the edge list, labels, and
/// manifest.
pub fn run_generate(cfg: &RunConfig) -> Result<(PathBuf, PathBuf)> {
    if cfg.generate_n.is_none() {
        return Err(Error::config("generate requires generate_n"));
    }
    let data = prepare_data(cfg)?;
    let dir = ensure_output_dir(cfg)?;
    let graph_path = dir.join(GENERATED_GRAPH_FILE);
    data.graph.write_edge_list(&graph_path)?;
    let labels = data.labels.expect("generator labels communities");
    let mut text = String::new();
    for (i, &c) in labels.y.iter().enumerate() {
        writeln!(text, "{i} {c}").expect("string write");
    }
    let labels_path = dir.join(GENERATED_LABELS_FILE);
    fs::write(&labels_path, text)
        .map_err(|e| Error::Io(format!("{}: {e}", labels_path.display())))?;
    write_manifest(cfg, "generate", &dir)?;
    Ok((graph_path, labels_path))
}

/// Degree distribution and power-law exponent estimate as printable text.
pub fn diagnose_report(cfg: &RunConfig) -> Result<String> {
    let data = prepare_data(cfg)?;
    let graph = &data.graph;
    let mut out = String::new();
    writeln!(out, "vertices {}", graph.n()).expect("string write");
    writeln!(out, "edges {}", graph.edge_count()).expect("string write");
    let mut histogram: Vec<(u64, usize)> = Vec::new();
    let mut degrees: Vec<u64> = graph.degrees().iter().map(|&d| d.round() as u64).collect();
    degrees.sort_unstable();
    for d in degrees {
        match histogram.last_mut() {
            Some((v, count)) if *v == d => *count += 1,
            _ => histogram.push((d, 1)),
        }
    }
    writeln!(out, "degree histogram (degree count):").expect("string write");
    for (d, count) in &histogram {
        writeln!(out, "  {d} {count}").expect("string write");
    }
    match estimate_power_law_alpha(graph.degrees(), 1.0) {
        Ok(alpha) => writeln!(out, "power-law alpha estimate: {alpha:.4}").expect("string write"),
        Err(e) => writeln!(out, "power-law alpha estimate: unavailable ({e})")
            .expect("string write"),
    }
    Ok(out)
}
