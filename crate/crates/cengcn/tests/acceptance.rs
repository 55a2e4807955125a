//! Acceptance gate: one test per release criterion, each printing a
//! `[PASS]` line with the measured quantities. Oracles are coded directly
//! in this file (naive matrix arithmetic, dense eigendecomposition,
//! Monte-Carlo walks) so they share nothing with the library internals
//! they check.

use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cengcn::centrality::{eigenvector_centrality, CentralityMeasure, CentralityProfile};
use cengcn::config::RunConfig;
use cengcn::engine::{
    forward, loss_and_gradients, loss_semi_supervised, loss_unsupervised_with, one_hot,
    regularization, row_normalize, train, AttentionSupport, Model, ModelConfig, Objective,
    OutputMode, Phase, ReconstructionTarget, TrainConfig, TrainTask,
};
use cengcn::eval::{accuracy, auc, nmi};
use cengcn::graph::{generate_scale_free, Graph};
use cengcn::labelprop::{propagate, similarity_sign, TransitionMatrix};
use cengcn::pipeline::{build_adjacency, train_and_score};
use cengcn::transform::{transform_graph, Ablation, TransformedAdjacency};

const BENCH_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const BENCH_ITERS: usize = 300;
const BENCH_N: usize = 400;
const BENCH_INTER: f64 = 0.55;
const BENCH_FEATURE_DIM: usize = 8;
const BENCH_FEATURE_SIGMA: f64 = 1.0;

// The link-prediction run instantiates the same two-community scale-free
// family in a lighter-mixing, lower-noise regime. With m_attach = 2 the
// residual graph after hiding half the edges has average degree two, so
// neighborhood overlap carries almost no signal and held-out edges are
// recoverable only where community membership still orders pairs. Heavy
// mixing (the classification regime above) caps every scorer near 0.5.
const LINK_INTER: f64 = 0.08;
const LINK_FEATURE_SIGMA: f64 = 0.25;

fn random_connected_graph(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.push((u, v));
    }
    let mut attempts = 0;
    while attempts < extra {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        let key = (i.min(j), i.max(j));
        if i != j && !edges.contains(&key) {
            edges.push(key);
        }
        attempts += 1;
    }
    Graph::from_edges(n, &edges).unwrap()
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random::<f64>() * 2.0 - 1.0)
}

/// Criterion: analytic gradients match central finite differences with
/// max relative error < 1e-4 across the attention x transform grid, all
/// depths in {1,2,3}, both losses, dropout off.
#[test]
fn criterion_01_gradient_finite_difference_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xFD01);
    let h = 1e-5;
    let mut instances = 0usize;
    let mut global_worst = 0.0f64;
    for k in 1..=3usize {
        for attention in [false, true] {
            for transformed in [false, true] {
                for classify in [false, true] {
                    let n = rng.random_range(4..=8);
                    let graph = random_connected_graph(n, n / 2, &mut rng);
                    let profile =
                        CentralityProfile::compute(&graph, CentralityMeasure::Degree, 25.0)
                            .unwrap();
                    let adjacency = if transformed {
                        let p_matrix = TransitionMatrix::build(&graph);
                        let labels = propagate(&p_matrix, &profile.hubs, 5).unwrap();
                        let signs = similarity_sign(&graph, &labels, &profile.hubs).unwrap();
                        transform_graph(&graph, &profile, &signs, 1.0, -1.0, Ablation::Full)
                            .unwrap()
                    } else {
                        TransformedAdjacency::identity_plus(&graph)
                    };
                    let a_norm = row_normalize(&adjacency);
                    let support = AttentionSupport::build(&graph, &profile.hubs);

                    let d = rng.random_range(2..=4);
                    let x = random_matrix(n, d, &mut rng);
                    let mut widths: Vec<usize> =
                        (0..k).map(|_| rng.random_range(1..=4)).collect();
                    if classify {
                        *widths.last_mut().unwrap() = 2;
                    }
                    let mut model = Model::init(ModelConfig {
                        input_dim: d,
                        widths,
                        attention,
                        mode: if classify {
                            OutputMode::Classify
                        } else {
                            OutputMode::Embed
                        },
                        dropout_keep: 1.0,
                        seed: rng.random::<u64>(),
                    })
                    .unwrap();

                    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
                    let y = one_hot(&labels, 2);
                    let mask: Vec<usize> = (0..n).filter(|_| rng.random::<f64>() < 0.7).collect();
                    let mask = if mask.is_empty() { vec![0] } else { mask };
                    let recon = ReconstructionTarget::build(&graph, 100.0).unwrap();
                    let objective = if classify {
                        Objective::Classify { y: &y, mask: &mask }
                    } else {
                        Objective::Embed { recon: &recon }
                    };

                    let sup = Some(&support);
                    let (_, trace) = forward(&model, &x, &a_norm, sup, Phase::Eval).unwrap();
                    let (_, grads) =
                        loss_and_gradients(&model, &a_norm, sup, &trace, &objective, 5e-4)
                            .unwrap();
                    let mut worst = 0.0f64;
                    for l in 0..model.weights.len() {
                        let (rows, cols) = model.weights[l].dim();
                        for r in 0..rows {
                            for c in 0..cols {
                                let orig = model.weights[l][[r, c]];
                                let eval_loss = |m: &Model| {
                                    let (z, _) =
                                        forward(m, &x, &a_norm, sup, Phase::Eval).unwrap();
                                    let data = match &objective {
                                        Objective::Classify { y, mask } => {
                                            loss_semi_supervised(&z, y, mask).unwrap()
                                        }
                                        Objective::Embed { recon } => {
                                            loss_unsupervised_with(&z, recon)
                                        }
                                    };
                                    data + regularization(&m.weights, 5e-4)
                                };
                                model.weights[l][[r, c]] = orig + h;
                                let up = eval_loss(&model);
                                model.weights[l][[r, c]] = orig - h;
                                let down = eval_loss(&model);
                                model.weights[l][[r, c]] = orig;
                                let fd = (up - down) / (2.0 * h);
                                let g = grads[l][[r, c]];
                                let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-6);
                                worst = worst.max(rel);
                            }
                        }
                    }
                    assert!(
                        worst < 1e-4,
                        "K={k} attention={attention} transform={transformed} \
                         classify={classify}: max relative error {worst}"
                    );
                    global_worst = global_worst.max(worst);
                    instances += 1;
                }
            }
        }
    }
    assert!(instances >= 20, "only {instances} instances");
    println!(
        "[PASS] gradient oracle: {instances} instances, max relative error {global_worst:.3e} < 1e-4"
    );
}

/// Criterion: with f_C identically 1 and attention off, the engine forward
/// is bit-identical to a directly-coded row-normalized A + I network.
#[test]
fn criterion_02_vanilla_gcn_reduction_bit_identical() {
    // A perfect matching keeps every degree at 1, so degree centrality and
    // f_C are identically 1 and the transform must reproduce A + I.
    let graph = Graph::from_edges(6, &[(0, 1), (2, 3), (4, 5)]).unwrap();
    let profile = CentralityProfile::compute(&graph, CentralityMeasure::Degree, 20.0).unwrap();
    assert!(profile.fc.iter().all(|&v| v == 1.0));
    let transition = TransitionMatrix::build(&graph);
    let labels = propagate(&transition, &profile.hubs, 5).unwrap();
    let signs = similarity_sign(&graph, &labels, &profile.hubs).unwrap();
    let transformed =
        transform_graph(&graph, &profile, &signs, 1.0, -1.0, Ablation::Full).unwrap();
    let a_norm = row_normalize(&transformed);

    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    let x = random_matrix(6, 6, &mut rng);
    let model = Model::init(ModelConfig {
        input_dim: 6,
        widths: vec![4, 2],
        attention: false,
        mode: OutputMode::Classify,
        dropout_keep: 1.0,
        seed: 7,
    })
    .unwrap();
    let (z, _) = forward(&model, &x, &a_norm, None, Phase::Eval).unwrap();

    // Directly-coded baseline: dense A + I from the graph, row-normalized,
    // two convolution layers, softmax head.
    let mut plain = graph.dense_adjacency();
    for i in 0..6 {
        plain[[i, i]] += 1.0;
    }
    for mut row in plain.rows_mut() {
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    let h1 = plain.dot(&x.dot(&model.weights[0])).mapv(f64::tanh);
    let mut z_ref = plain.dot(&h1.dot(&model.weights[1]));
    for mut row in z_ref.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let total = row.sum();
        row.mapv_inplace(|v| v / total);
    }
    for (a, b) in z.iter().zip(z_ref.iter()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    println!("[PASS] vanilla reduction: engine output bit-identical to directly-coded A + I GCN");
}

fn naive_transition(graph: &Graph) -> Vec<Vec<f64>> {
    let n = graph.n();
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        let deg = graph.degree(i);
        if deg > 0.0 {
            for &(j, w) in graph.neighbors(i) {
                p[i][j] = w / deg;
            }
        }
    }
    p
}

fn naive_matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for (t, bt) in b.iter().enumerate() {
            let av = a[i][t];
            if av != 0.0 {
                for j in 0..m {
                    out[i][j] += av * bt[j];
                }
            }
        }
    }
    out
}

/// Criterion: propagation scores equal the dense P^5 L0 matrix power to
/// 1e-12 and a Monte-Carlo walk estimate to 0.01 per entry, on 10 graphs.
#[test]
fn criterion_03_label_propagation_matrix_power_and_walk_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1AB5);
    let mut worst_exact = 0.0f64;
    let mut worst_mc = 0.0f64;
    for case in 0..10 {
        let n = rng.random_range(5..=12);
        let graph = random_connected_graph(n, n / 2, &mut rng);
        let hub_count = rng.random_range(1..=3.min(n));
        let mut hubs: Vec<usize> = Vec::new();
        while hubs.len() < hub_count {
            let v = rng.random_range(0..n);
            if !hubs.contains(&v) {
                hubs.push(v);
            }
        }
        hubs.sort_unstable();
        let t = 5;
        let transition = TransitionMatrix::build(&graph);
        let labels = propagate(&transition, &hubs, t).unwrap();
        let impl_dense = labels.to_dense();

        let p = naive_transition(&graph);
        let mut l: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..hubs.len())
                    .map(|c| if hubs[c] == i { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        for _ in 0..t {
            l = naive_matmul(&p, &l);
        }
        for i in 0..n {
            for c in 0..hubs.len() {
                let diff = (impl_dense[[i, c]] - l[i][c]).abs();
                assert!(diff < 1e-12, "case {case}: matrix-power mismatch {diff}");
                worst_exact = worst_exact.max(diff);
            }
        }

        // Independent Monte-Carlo estimate: uniform random walks of length
        // t from every start vertex.
        let walks = 100_000usize;
        let mut walk_rng = ChaCha8Rng::seed_from_u64(0xCA5E + case as u64);
        for i in 0..n {
            let mut counts = vec![0usize; hubs.len()];
            for _ in 0..walks {
                let mut v = i;
                let mut alive = true;
                for _ in 0..t {
                    let neigh = graph.neighbors(v);
                    if neigh.is_empty() {
                        alive = false;
                        break;
                    }
                    v = neigh[walk_rng.random_range(0..neigh.len())].0;
                }
                if alive {
                    if let Ok(c) = hubs.binary_search(&v) {
                        counts[c] += 1;
                    }
                }
            }
            for c in 0..hubs.len() {
                let estimate = counts[c] as f64 / walks as f64;
                let diff = (impl_dense[[i, c]] - estimate).abs();
                assert!(diff < 0.01, "case {case}: Monte-Carlo mismatch {diff}");
                worst_mc = worst_mc.max(diff);
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    println!(
        "[PASS] label propagation oracle: 10 graphs, matrix power within {worst_exact:.2e}, \
         Monte-Carlo within {worst_mc:.4}, {elapsed:.2?}"
    );
}

/// Criterion: the star graph with degree centrality, r=0.2, p=1, q=-1,
/// t=5 yields diagonal [4,1,1,1,1], edge weights 4, and all-positive
/// similarity signs, exactly.
#[test]
fn criterion_04_star_end_to_end_fixture() {
    let graph = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
    let mut cfg = RunConfig::parse("generate_n = 5\nhub_rate = 0.2\np = 1\nq = -1\nsteps = 5\n")
        .unwrap();
    cfg.finalize_with_env(None).unwrap();
    let art = build_adjacency(&cfg, &graph).unwrap();
    assert_eq!(art.adjacency.diag(), &[4.0, 1.0, 1.0, 1.0, 1.0]);
    let mut edges: Vec<(usize, usize, f64)> = art.adjacency.edges().to_vec();
    edges.sort_by_key(|&(i, j, _)| (i, j));
    assert_eq!(
        edges,
        vec![(0, 1, 4.0), (0, 2, 4.0), (0, 3, 4.0), (0, 4, 4.0)]
    );
    let signs = art.signs.expect("full pipeline computes signs");
    assert_eq!(signs.negative_count(), 0);
    for leaf in 1..5 {
        assert_eq!(signs.sign(0, leaf), Some(1));
    }
    println!(
        "[PASS] star fixture: diagonal [4,1,1,1,1], edge weights 4, all similarity signs +1"
    );
}

/// Criterion: power-iteration centrality matches a dense symmetric
/// eigendecomposition within 1e-6 after min-normalization; the star gives
/// [2,1,1,1,1].
#[test]
fn criterion_05_eigenvector_centrality_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE16E);
    let mut worst = 0.0f64;
    for case in 0..10 {
        let n = rng.random_range(4..=12);
        let graph = random_connected_graph(n, n, &mut rng);
        let c = eigenvector_centrality(&graph, 1e-10, 10_000).unwrap();

        let dense = graph.dense_adjacency();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| dense[[i, j]]);
        let eigen = nalgebra::SymmetricEigen::new(m);
        let mut top = 0;
        for i in 1..n {
            if eigen.eigenvalues[i] > eigen.eigenvalues[top] {
                top = i;
            }
        }
        let v = eigen.eigenvectors.column(top);
        let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        let min = abs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 1e-9, "oracle vector has a near-zero component");
        for i in 0..n {
            let diff = (c[i] - abs[i] / min).abs();
            assert!(diff < 1e-6, "case {case} vertex {i}: |{} - {}|", c[i], abs[i] / min);
            worst = worst.max(diff);
        }
    }

    let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
    let c = eigenvector_centrality(&star, 1e-10, 10_000).unwrap();
    for (i, expected) in [2.0, 1.0, 1.0, 1.0, 1.0].iter().enumerate() {
        assert!((c[i] - expected).abs() < 1e-8, "star component {i}: {}", c[i]);
    }
    println!(
        "[PASS] eigenvector centrality: 10 graphs within {worst:.2e} of dense oracle, \
         star = [2,1,1,1,1]"
    );
}

/// Criterion: every attention row sums to 1 within 1e-12 on every training
/// iteration of a 50-vertex run, and the transformed adjacency stays
/// symmetric under all five variants.
#[test]
fn criterion_06_attention_rows_and_transform_symmetry() {
    let graph = generate_scale_free(50, 2, 77).unwrap();
    let profile = CentralityProfile::compute(&graph, CentralityMeasure::Degree, 10.0).unwrap();
    let transition = TransitionMatrix::build(&graph);
    let prop = propagate(&transition, &profile.hubs, 5).unwrap();
    let signs = similarity_sign(&graph, &prop, &profile.hubs).unwrap();
    let transformed =
        transform_graph(&graph, &profile, &signs, 1.0, -1.0, Ablation::Full).unwrap();
    let a_norm = row_normalize(&transformed);
    let support = AttentionSupport::build(&graph, &profile.hubs);

    let labels: Vec<usize> = (0..50).map(|i| usize::from(i % 2 == 0)).collect();
    let y = one_hot(&labels, 2);
    let train_idx: Vec<usize> = (0..10).collect();
    let val_idx: Vec<usize> = (10..20).collect();
    let x = cengcn::graph::identity_features(50).x;
    let model = Model::init(ModelConfig {
        input_dim: 50,
        widths: vec![8, 2],
        attention: true,
        mode: OutputMode::Classify,
        dropout_keep: 0.5,
        seed: 3,
    })
    .unwrap();
    let task = TrainTask::Classify {
        y: &y,
        labels: &labels,
        train: &train_idx,
        val: &val_idx,
    };
    let mut tc = TrainConfig::classify_defaults();
    tc.max_iters = 60;
    let outcome = train(model, &x, &a_norm, Some(&support), &task, &tc).unwrap();
    assert!(
        outcome.max_attention_row_error < 1e-12,
        "worst attention row-sum error {}",
        outcome.max_attention_row_error
    );

    let mut symmetric_checked = 0;
    for ablation in [
        "full",
        "TD",
        "AD",
        "WD",
        "ID",
    ] {
        let cfg_text = format!("generate_n = 50\nablation = {ablation}\nhub_rate = 0.1\n");
        let mut cfg = RunConfig::parse(&cfg_text).unwrap();
        cfg.finalize_with_env(None).unwrap();
        let art = build_adjacency(&cfg, &graph).unwrap();
        let dense = art.adjacency.to_dense();
        for i in 0..50 {
            for j in 0..50 {
                assert_eq!(
                    dense[[i, j]].to_bits(),
                    dense[[j, i]].to_bits(),
                    "{ablation} breaks symmetry at ({i}, {j})"
                );
            }
        }
        symmetric_checked += 1;
    }
    println!(
        "[PASS] attention rows: max row-sum error {:.2e} over 60 iterations; \
         adjacency symmetric under {symmetric_checked} variants",
        outcome.max_attention_row_error
    );
}

/// Writes one benchmark instance: a planted-2-community scale-free graph
/// plus fixed vertex features carrying a noisy community signal
/// (class-antipodal mean, Gaussian noise via Box-Muller). Fixed features
/// are what make depth a real trade-off: convolution denoises them at
/// small K and blurs the class signal away at large K.
fn write_bench_dataset(
    dir: &std::path::Path,
    seed: u64,
    inter: f64,
    sigma: f64,
) -> (std::path::PathBuf, std::path::PathBuf, std::path::PathBuf) {
    use std::fmt::Write as _;
    let (graph, labels) =
        cengcn::graph::generate_planted_partition(BENCH_N, 2, 2, inter, seed).unwrap();
    let graph_path = dir.join(format!("graph_{seed}.txt"));
    graph.write_edge_list(&graph_path).unwrap();

    let labels_path = dir.join(format!("labels_{seed}.txt"));
    let mut text = String::new();
    for (i, &c) in labels.y.iter().enumerate() {
        writeln!(text, "{i} {c}").unwrap();
    }
    std::fs::write(&labels_path, text).unwrap();

    let features_path = dir.join(format!("features_{seed}.txt"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xFEA7);
    let scale = 1.0 / (BENCH_FEATURE_DIM as f64).sqrt();
    let mut text = String::new();
    for i in 0..graph.n() {
        let s = if labels.y[i] == 0 { scale } else { -scale };
        write!(text, "{i}").unwrap();
        for _ in 0..BENCH_FEATURE_DIM {
            let u1: f64 = rng.random::<f64>().max(1e-12);
            let u2: f64 = rng.random::<f64>();
            let eps = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
            write!(text, " {}", s + sigma * eps).unwrap();
        }
        writeln!(text).unwrap();
    }
    std::fs::write(&features_path, text).unwrap();
    (graph_path, labels_path, features_path)
}

fn bench_config(
    dir: &std::path::Path,
    seed: u64,
    ablation: &str,
    layers: usize,
    width: usize,
    extra: &str,
) -> RunConfig {
    let (graph_path, labels_path, features_path) =
        write_bench_dataset(dir, seed, BENCH_INTER, BENCH_FEATURE_SIGMA);
    let hidden = vec![width.to_string(); layers - 1].join(" ");
    let text = format!(
        "graph = {}\nlabels = {}\nfeatures = {}\n\
         seed = {seed}\nablation = {ablation}\n\
         hidden = {hidden}\nhub_rate = 0.10\ntrain_frac = 0.1\nval_frac = 0.1\n\
         iterations = {BENCH_ITERS}\n{extra}",
        graph_path.display(),
        labels_path.display(),
        features_path.display(),
    );
    let mut cfg = RunConfig::parse(&text).unwrap();
    cfg.finalize_with_env(None).unwrap();
    cfg
}

fn mean_accuracy(ablation: &str, layers: usize) -> f64 {
    let dir = tempfile::tempdir().unwrap();
    let mut total = 0.0;
    for &seed in &BENCH_SEEDS {
        let cfg = bench_config(dir.path(), seed, ablation, layers, 16, "");
        total += train_and_score(&cfg).unwrap();
    }
    total / BENCH_SEEDS.len() as f64
}

/// Criterion: on the planted-2-community benchmark the full degree variant
/// matches or beats the vanilla reduction (within 0.02) and both exceed
/// 0.6 mean test accuracy over 5 seeds.
#[test]
fn criterion_07_benchmark_ordering_full_vs_vanilla() {
    let cen = mean_accuracy("full", 2);
    let gcn = mean_accuracy("gcn", 2);
    assert!(
        cen >= gcn - 0.02,
        "full {cen:.4} worse than vanilla {gcn:.4} by more than 0.02"
    );
    assert!(cen > 0.6, "full accuracy {cen:.4} not above 0.6");
    assert!(gcn > 0.6, "vanilla accuracy {gcn:.4} not above 0.6");
    println!(
        "[PASS] benchmark ordering: mean accuracy full {cen:.4} vs vanilla {gcn:.4} \
         (threshold: full >= vanilla - 0.02, both > 0.6)"
    );
}

/// Criterion: at 10 layers the full variant stays at least 0.1 above the
/// vanilla reduction, and vanilla at 10 layers collapses at least 0.1
/// below vanilla at 2 layers.
#[test]
fn criterion_08_depth_robustness_trend() {
    let cen10 = mean_accuracy("full", 10);
    let gcn10 = mean_accuracy("gcn", 10);
    let gcn2 = mean_accuracy("gcn", 2);
    println!(
        "depth trend: full K=10 {cen10:.4}, vanilla K=10 {gcn10:.4}, vanilla K=2 {gcn2:.4}"
    );
    assert!(
        cen10 >= gcn10 + 0.1,
        "full at K=10 {cen10:.4} not >= vanilla at K=10 {gcn10:.4} + 0.1"
    );
    assert!(
        gcn10 <= gcn2 - 0.1,
        "vanilla at K=10 {gcn10:.4} not <= vanilla at K=2 {gcn2:.4} - 0.1"
    );
    println!(
        "[PASS] depth robustness: K=10 full {cen10:.4}, K=10 vanilla {gcn10:.4}, \
         K=2 vanilla {gcn2:.4}"
    );
}

/// Criterion: unsupervised link prediction reaches mean AUC >= 0.70 over 5
/// seeds, and random scores sit at 0.5 within 0.02.
#[test]
fn criterion_09_link_prediction_auc_and_null() {
    let dir = tempfile::tempdir().unwrap();
    let mut total = 0.0;
    for &seed in &BENCH_SEEDS {
        let (graph_path, _, features_path) =
            write_bench_dataset(dir.path(), seed, LINK_INTER, LINK_FEATURE_SIGMA);
        let text = format!(
            "graph = {}\nfeatures = {}\nseed = {seed}\nablation = full\n\
             hidden = 64\nhub_rate = 0.10\nmode = embed\n\
             task = link_prediction\nembed_dim = 32\n",
            graph_path.display(),
            features_path.display(),
        );
        let mut cfg = RunConfig::parse(&text).unwrap();
        cfg.finalize_with_env(None).unwrap();
        total += train_and_score(&cfg).unwrap();
    }
    let mean_auc = total / BENCH_SEEDS.len() as f64;
    assert!(mean_auc >= 0.70, "mean AUC {mean_auc:.4} below 0.70");

    let mut rng = ChaCha8Rng::seed_from_u64(0xA0C5);
    let labels: Vec<usize> = (0..800).map(|i| usize::from(i < 400)).collect();
    let mut null_total = 0.0;
    let draws = 100;
    for _ in 0..draws {
        let scores: Vec<f64> = (0..800).map(|_| rng.random::<f64>()).collect();
        null_total += auc(&scores, &labels).unwrap();
    }
    let null_mean = null_total / draws as f64;
    assert!(
        (null_mean - 0.5).abs() <= 0.02,
        "random-score AUC {null_mean:.4} not within 0.5 +/- 0.02"
    );
    println!(
        "[PASS] link prediction: mean AUC {mean_auc:.4} >= 0.70, random null {null_mean:.4}"
    );
}

/// Criterion: metric trivia hold exactly.
#[test]
fn criterion_10_metric_trivia_exact() {
    let scores = ndarray::array![[0.9, 0.1], [0.1, 0.9], [0.8, 0.2]];
    let labels = [0usize, 1, 0];
    assert_eq!(accuracy(&scores, &labels, &[0, 1, 2]).unwrap(), 1.0);

    let tied = vec![0.5; 10];
    let mixed: Vec<usize> = (0..10).map(|i| usize::from(i % 2 == 0)).collect();
    assert_eq!(auc(&tied, &mixed).unwrap(), 0.5);

    let partition = [0usize, 0, 1, 1, 2, 2];
    assert_eq!(nmi(&partition, &partition).unwrap(), 1.0);
    println!("[PASS] metric trivia: accuracy 1.0, tied AUC 0.5, identical-partition NMI 1.0");
}

/// Criterion: label-propagation wall time grows no worse than with
/// log-log slope 2.3 over n in {200, 400, 800} (2% hubs, so the hub count
/// scales with n).
#[test]
fn criterion_11_label_propagation_complexity_slope() {
    let steps = 200;
    let reps = 15;
    let mut times = Vec::new();
    for &n in &[200usize, 400, 800] {
        let graph = generate_scale_free(n, 2, 31).unwrap();
        let profile = CentralityProfile::compute(&graph, CentralityMeasure::Degree, 2.0).unwrap();
        let transition = TransitionMatrix::build(&graph);
        // Warm-up pass, then the minimum over repetitions to shed timer
        // and scheduler noise.
        let _ = propagate(&transition, &profile.hubs, steps).unwrap();
        let mut best = f64::INFINITY;
        for _ in 0..reps {
            let start = Instant::now();
            let labels = propagate(&transition, &profile.hubs, steps).unwrap();
            let dt = start.elapsed().as_secs_f64();
            assert_eq!(labels.n(), n);
            best = best.min(dt);
        }
        times.push((n as f64, best));
    }
    let slope = (times[2].1 / times[0].1).ln() / (times[2].0 / times[0].0).ln();
    assert!(
        slope <= 2.3,
        "log-log slope {slope:.3} exceeds 2.3 (times: {times:?})"
    );
    println!(
        "[PASS] propagation complexity: log-log slope {slope:.3} <= 2.3 over n = 200/400/800"
    );
}
