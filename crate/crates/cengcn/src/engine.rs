//! The graph-convolution engine: normalization, forward pass with hub
//! attention and concatenation, both losses, exact reverse-mode gradients,
//! Adam, the training loop, and model checkpoints.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::{s, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::accuracy;
use crate::graph::Graph;
use crate::transform::TransformedAdjacency;

pub const DEFAULT_DROPOUT_KEEP: f64 = 0.5;
pub const DEFAULT_WEIGHT_DECAY: f64 = 5e-4;
pub const DEFAULT_RHO: f64 = 100.0;
pub const DEFAULT_CLASSIFY_LR: f64 = 0.01;
pub const DEFAULT_CLASSIFY_ITERS: usize = 1000;
pub const DEFAULT_EMBED_LR: f64 = 0.001;
pub const DEFAULT_EMBED_ITERS: usize = 150;
pub const EARLY_STOP_WINDOW: usize = 10;
pub const EARLY_STOP_REL_TOL: f64 = 1e-6;

const LN_CLAMP: f64 = 1e-12;

/// How the transformed adjacency is normalized before convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Row,
    Symmetric,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Normalization::Row => write!(f, "row"),
            Normalization::Symmetric => write!(f, "symmetric"),
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row" => Ok(Normalization::Row),
            "symmetric" => Ok(Normalization::Symmetric),
            other => Err(Error::config(format!(
                "unknown normalization '{other}' (expected row or symmetric)"
            ))),
        }
    }
}

/// D^-1 A over the dense transformed adjacency. Row sums are positive
/// because the diagonal carries f_C >= 1.
pub fn row_normalize(t: &TransformedAdjacency) -> Array2<f64> {
    let mut a = t.to_dense();
    for mut row in a.rows_mut() {
        let s = row.sum();
        assert!(s > 0.0, "zero row sum despite diagonal >= 1");
        row.mapv_inplace(|v| v / s);
    }
    a
}

/// D^-1/2 A D^-1/2 over the dense transformed adjacency.
pub fn symmetric_normalize(t: &TransformedAdjacency) -> Array2<f64> {
    let a = t.to_dense();
    let inv_sqrt: Vec<f64> = a
        .rows()
        .into_iter()
        .map(|row| {
            let s = row.sum();
            assert!(s > 0.0, "zero row sum despite diagonal >= 1");
            1.0 / s.sqrt()
        })
        .collect();
    let n = t.n();
    let mut out = a;
    for i in 0..n {
        for j in 0..n {
            out[[i, j]] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    out
}

pub fn normalize(t: &TransformedAdjacency, kind: Normalization) -> Array2<f64> {
    match kind {
        Normalization::Row => row_normalize(t),
        Normalization::Symmetric => symmetric_normalize(t),
    }
}

/// Output head: row-softmax scores for classification, tanh coordinates
/// for embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputMode {
    Classify,
    Embed,
}

impl fmt::Display for OutputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputMode::Classify => write!(f, "classify"),
            OutputMode::Embed => write!(f, "embed"),
        }
    }
}

impl FromStr for OutputMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classify" => Ok(OutputMode::Classify),
            "embed" => Ok(OutputMode::Embed),
            other => Err(Error::config(format!(
                "unknown mode '{other}' (expected classify or embed)"
            ))),
        }
    }
}

/// Architecture and training-relevant model settings.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub input_dim: usize,
    /// Output widths of layers 1..K; the last entry is the embedding or
    /// class dimension.
    pub widths: Vec<usize>,
    pub attention: bool,
    pub mode: OutputMode,
    pub dropout_keep: f64,
    pub seed: u64,
}

impl ModelConfig {
    fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::config("input dimension must be positive"));
        }
        if self.widths.is_empty() {
            return Err(Error::config("need at least one layer"));
        }
        if self.widths.contains(&0) {
            return Err(Error::config("layer widths must be positive"));
        }
        if !(self.dropout_keep > 0.0 && self.dropout_keep <= 1.0) {
            return Err(Error::config(format!(
                "dropout keep probability must lie in (0, 1], got {}",
                self.dropout_keep
            )));
        }
        Ok(())
    }

    pub fn layer_count(&self) -> usize {
        self.widths.len()
    }

    /// Input width of layer `l`: the raw feature width for the first layer,
    /// afterwards the previous width, doubled when attention concatenation
    /// is active on non-output layers.
    pub fn layer_input_width(&self, l: usize) -> usize {
        if l == 0 {
            self.input_dim
        } else if self.attention {
            2 * self.widths[l - 1]
        } else {
            self.widths[l - 1]
        }
    }
}

/// Weights plus configuration; the unit trained and checkpointed.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub weights: Vec<Array2<f64>>,
}

impl Model {
    /// Glorot-uniform initialization, deterministic in `config.seed`.
    pub fn init(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut weights = Vec::with_capacity(config.layer_count());
        for l in 0..config.layer_count() {
            let fan_in = config.layer_input_width(l);
            let fan_out = config.widths[l];
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w = Array2::from_shape_fn((fan_in, fan_out), |_| {
                rng.random::<f64>() * 2.0 * limit - limit
            });
            weights.push(w);
        }
        Ok(Model { config, weights })
    }

    /// Save as a versioned text checkpoint; values round-trip exactly.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        writeln!(out, "cengcn-checkpoint v1").expect("string write");
        writeln!(out, "mode {}", self.config.mode).expect("string write");
        writeln!(out, "attention {}", self.config.attention as u8).expect("string write");
        writeln!(out, "dropout_keep {}", self.config.dropout_keep).expect("string write");
        writeln!(out, "seed {}", self.config.seed).expect("string write");
        writeln!(out, "input_dim {}", self.config.input_dim).expect("string write");
        let widths: Vec<String> = self.config.widths.iter().map(|w| w.to_string()).collect();
        writeln!(out, "widths {}", widths.join(" ")).expect("string write");
        writeln!(out, "precision f64").expect("string write");
        for (l, w) in self.weights.iter().enumerate() {
            writeln!(out, "weights {} {} {}", l, w.nrows(), w.ncols()).expect("string write");
            for row in w.rows() {
                let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{}", vals.join(" ")).expect("string write");
            }
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let bad = |msg: &str| Error::data(format!("{}: {msg}", path.display()));
        let mut lines = text.lines();
        if lines.next() != Some("cengcn-checkpoint v1") {
            return Err(bad("not a v1 checkpoint"));
        }
        let mut field = |name: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| bad(&format!("missing {name}")))?;
            line.strip_prefix(name)
                .map(|rest| rest.trim().to_string())
                .ok_or_else(|| bad(&format!("expected {name} line, got '{line}'")))
        };
        let mode: OutputMode = field("mode")?.parse()?;
        let attention = match field("attention")?.as_str() {
            "0" => false,
            "1" => true,
            _ => return Err(bad("attention flag must be 0 or 1")),
        };
        let dropout_keep: f64 = field("dropout_keep")?
            .parse()
            .map_err(|_| bad("bad dropout_keep"))?;
        let seed: u64 = field("seed")?.parse().map_err(|_| bad("bad seed"))?;
        let input_dim: usize = field("input_dim")?
            .parse()
            .map_err(|_| bad("bad input_dim"))?;
        let widths: Vec<usize> = field("widths")?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad widths")))
            .collect::<Result<_>>()?;
        if field("precision")? != "f64" {
            return Err(bad("unsupported precision"));
        }
        let config = ModelConfig {
            input_dim,
            widths,
            attention,
            mode,
            dropout_keep,
            seed,
        };
        config.validate()?;

        let mut weights = Vec::with_capacity(config.layer_count());
        for l in 0..config.layer_count() {
            let header = lines
                .next()
                .ok_or_else(|| bad(&format!("missing weights {l} header")))?;
            let fields: Vec<&str> = header.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "weights" {
                return Err(bad(&format!("bad weights header '{header}'")));
            }
            let rows: usize = fields[2].parse().map_err(|_| bad("bad row count"))?;
            let cols: usize = fields[3].parse().map_err(|_| bad("bad column count"))?;
            if rows != config.layer_input_width(l) || cols != config.widths[l] {
                return Err(bad(&format!(
                    "weights {l} shape {rows}x{cols} disagrees with architecture"
                )));
            }
            let mut w = Array2::zeros((rows, cols));
            for r in 0..rows {
                let line = lines
                    .next()
                    .ok_or_else(|| bad(&format!("weights {l} truncated at row {r}")))?;
                let vals: Vec<&str> = line.split_whitespace().collect();
                if vals.len() != cols {
                    return Err(bad(&format!("weights {l} row {r} has {} values", vals.len())));
                }
                for (c, tok) in vals.iter().enumerate() {
                    w[[r, c]] = tok
                        .parse()
                        .map_err(|_| bad(&format!("bad value in weights {l}")))?;
                }
            }
            weights.push(w);
        }
        Ok(Model { config, weights })
    }
}

/// Per-vertex attention support sets: the non-hub neighbors plus the vertex
/// itself, ascending by id.
#[derive(Debug, Clone)]
pub struct AttentionSupport {
    supports: Vec<Vec<usize>>,
}

impl AttentionSupport {
    pub fn build(graph: &Graph, hubs: &[usize]) -> Self {
        let n = graph.n();
        let mut is_hub = vec![false; n];
        for &h in hubs {
            is_hub[h] = true;
        }
        let supports = (0..n)
            .map(|i| {
                let mut s: Vec<usize> = graph
                    .neighbors(i)
                    .iter()
                    .map(|&(j, _)| j)
                    .filter(|&j| !is_hub[j])
                    .collect();
                let pos = s.partition_point(|&j| j < i);
                s.insert(pos, i);
                s
            })
            .collect();
        AttentionSupport { supports }
    }

    pub fn n(&self) -> usize {
        self.supports.len()
    }

    pub fn support(&self, i: usize) -> &[usize] {
        &self.supports[i]
    }
}

/// Softmax-weighted aggregation over each vertex's support set using
/// current-feature dot products, followed by tanh. Returns the new features
/// and the attention weights aligned with each support list.
pub fn hub_attention(
    h: &Array2<f64>,
    support: &AttentionSupport,
) -> (Array2<f64>, Vec<Vec<f64>>) {
    let n = h.nrows();
    let d = h.ncols();
    assert_eq!(n, support.n(), "support built for a different graph");
    let mut h_tilde = Array2::<f64>::zeros((n, d));
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let s_i = support.support(i);
        let hi = h.row(i);
        let logits: Vec<f64> = s_i.iter().map(|&j| hi.dot(&h.row(j))).collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        let a: Vec<f64> = exps.iter().map(|&e| e / total).collect();
        for (idx, &j) in s_i.iter().enumerate() {
            let w = a[idx];
            for c in 0..d {
                h_tilde[[i, c]] += w * h[[j, c]];
            }
        }
        for c in 0..d {
            h_tilde[[i, c]] = h_tilde[[i, c]].tanh();
        }
        weights.push(a);
    }
    (h_tilde, weights)
}

/// Rowwise concatenation of the convolution output with the attention
/// output; doubles the width.
pub fn concat_layer(h: &Array2<f64>, h_tilde: &Array2<f64>) -> Result<Array2<f64>> {
    if h.dim() != h_tilde.dim() {
        return Err(Error::data(format!(
            "concat shape mismatch: {:?} vs {:?}",
            h.dim(),
            h_tilde.dim()
        )));
    }
    let (n, d) = h.dim();
    let mut out = Array2::zeros((n, 2 * d));
    out.slice_mut(s![.., ..d]).assign(h);
    out.slice_mut(s![.., d..]).assign(h_tilde);
    Ok(out)
}

#[derive(Debug, Clone)]
struct AttnTrace {
    weights: Vec<Vec<f64>>,
    h_tilde: Array2<f64>,
}

#[derive(Debug, Clone)]
struct LayerTrace {
    /// Layer input after dropout; what the weight gradient contracts with.
    input: Array2<f64>,
    /// Inverted-dropout scale factors (0 or 1/keep); None in eval phase.
    mask: Option<Array2<f64>>,
    /// Activation output of the convolution.
    conv: Array2<f64>,
    attn: Option<AttnTrace>,
}

/// Everything the backward pass reuses from one forward call.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    layers: Vec<LayerTrace>,
}

impl ForwardTrace {
    /// Attention rows of one layer, aligned with the support lists; None
    /// for the output layer or when attention is disabled.
    pub fn attention_weights(&self, layer: usize) -> Option<&[Vec<f64>]> {
        self.layers[layer]
            .attn
            .as_ref()
            .map(|a| a.weights.as_slice())
    }

    /// Largest deviation of any attention row sum from 1 across all layers.
    pub fn max_attention_row_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for layer in &self.layers {
            if let Some(attn) = &layer.attn {
                for row in &attn.weights {
                    let sum: f64 = row.iter().sum();
                    worst = worst.max((sum - 1.0).abs());
                }
            }
        }
        worst
    }
}

/// Whether a forward pass samples dropout masks.
pub enum Phase<'r> {
    Train(&'r mut ChaCha8Rng),
    Eval,
}

fn row_softmax(pre: &mut Array2<f64>) {
    for mut row in pre.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let total = row.sum();
        row.mapv_inplace(|v| v / total);
    }
}

/// Run all K layers: dropout on each layer's input (train phase only),
/// convolution with tanh, hub attention plus concatenation on non-output
/// layers, and the mode's output head on the last layer. Returns Z and the
/// trace the backward pass needs.
pub fn forward(
    model: &Model,
    x: &Array2<f64>,
    a_norm: &Array2<f64>,
    support: Option<&AttentionSupport>,
    phase: Phase,
) -> Result<(Array2<f64>, ForwardTrace)> {
    let cfg = &model.config;
    let n = x.nrows();
    if a_norm.dim() != (n, n) {
        return Err(Error::data(format!(
            "normalized adjacency is {:?} but features have {n} rows",
            a_norm.dim()
        )));
    }
    if x.ncols() != cfg.input_dim {
        return Err(Error::data(format!(
            "feature width {} does not match model input dimension {}",
            x.ncols(),
            cfg.input_dim
        )));
    }
    let k = cfg.layer_count();
    if cfg.attention && k > 1 {
        match support {
            Some(sup) if sup.n() == n => {}
            Some(_) => return Err(Error::data("attention support built for a different graph")),
            None => return Err(Error::config("attention enabled but no support sets given")),
        }
    }

    let mut rng = match phase {
        Phase::Train(r) => Some(r),
        Phase::Eval => None,
    };
    let keep = cfg.dropout_keep;
    let mut cur = x.clone();
    let mut layers = Vec::with_capacity(k);
    for l in 0..k {
        let (input, mask) = match (&mut rng, keep < 1.0) {
            (Some(rng), true) => {
                let mask = Array2::from_shape_fn(cur.dim(), |_| {
                    if rng.random::<f64>() < keep {
                        1.0 / keep
                    } else {
                        0.0
                    }
                });
                (&cur * &mask, Some(mask))
            }
            _ => (cur.clone(), None),
        };
        let mut pre = a_norm.dot(&input.dot(&model.weights[l]));
        let is_output = l + 1 == k;
        if is_output && cfg.mode == OutputMode::Classify {
            row_softmax(&mut pre);
        } else {
            pre.mapv_inplace(f64::tanh);
        }
        let conv = pre;
        if conv.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric(format!(
                "non-finite activation in layer {}",
                l + 1
            )));
        }
        let attn = if !is_output && cfg.attention {
            let (h_tilde, weights) = hub_attention(&conv, support.expect("validated above"));
            Some(AttnTrace { weights, h_tilde })
        } else {
            None
        };
        cur = match &attn {
            Some(at) => concat_layer(&conv, &at.h_tilde)?,
            None => conv.clone(),
        };
        layers.push(LayerTrace {
            input,
            mask,
            conv,
            attn,
        });
    }
    let z = layers.last().expect("k >= 1").conv.clone();
    Ok((z, ForwardTrace { layers }))
}

/// One-hot label matrix over `classes` columns.
pub fn one_hot(labels: &[usize], classes: usize) -> Array2<f64> {
    let mut y = Array2::zeros((labels.len(), classes));
    for (i, &c) in labels.iter().enumerate() {
        y[[i, c]] = 1.0;
    }
    y
}

/// Masked cross-entropy over softmax rows, summed (not averaged) across the
/// masked vertices; ln is clamped at 1e-12.
pub fn loss_semi_supervised(z: &Array2<f64>, y: &Array2<f64>, mask: &[usize]) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::data("cross-entropy over an empty mask"));
    }
    if z.dim() != y.dim() {
        return Err(Error::data(format!(
            "prediction shape {:?} does not match labels {:?}",
            z.dim(),
            y.dim()
        )));
    }
    let mut loss = 0.0;
    for &i in mask {
        for f in 0..z.ncols() {
            if y[[i, f]] != 0.0 {
                loss -= y[[i, f]] * z[[i, f]].max(LN_CLAMP).ln();
            }
        }
    }
    Ok(loss)
}

/// Precomputed reconstruction data: the binary edge-indicator target and
/// the squared emphasis weights (rho^2 on edges, 1 elsewhere including the
/// diagonal).
#[derive(Debug, Clone)]
pub struct ReconstructionTarget {
    pub target: Array2<f64>,
    pub weight_sq: Array2<f64>,
    pub rho: f64,
}

impl ReconstructionTarget {
    pub fn build(graph: &Graph, rho: f64) -> Result<Self> {
        if !(rho > 1.0) {
            return Err(Error::config(format!(
                "reconstruction emphasis rho must be > 1, got {rho}"
            )));
        }
        let n = graph.n();
        let mut target = Array2::zeros((n, n));
        let mut weight_sq = Array2::ones((n, n));
        for &(i, j, _) in graph.edges() {
            target[[i, j]] = 1.0;
            target[[j, i]] = 1.0;
            weight_sq[[i, j]] = rho * rho;
            weight_sq[[j, i]] = rho * rho;
        }
        Ok(ReconstructionTarget {
            target,
            weight_sq,
            rho,
        })
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Weighted Frobenius reconstruction loss over all n^2 entries of
/// sigmoid(Z Z^T) against the edge indicator.
pub fn loss_unsupervised_with(z: &Array2<f64>, recon: &ReconstructionTarget) -> f64 {
    let s = z.dot(&z.t()).mapv(sigmoid);
    let mut loss = 0.0;
    for ((i, j), &sv) in s.indexed_iter() {
        let d = sv - recon.target[[i, j]];
        loss += recon.weight_sq[[i, j]] * d * d;
    }
    loss
}

/// Convenience form building the target from the graph.
pub fn loss_unsupervised(z: &Array2<f64>, graph: &Graph, rho: f64) -> Result<f64> {
    Ok(loss_unsupervised_with(z, &ReconstructionTarget::build(graph, rho)?))
}

/// alpha times the summed squared Frobenius norms of all weights.
pub fn regularization(weights: &[Array2<f64>], alpha: f64) -> f64 {
    alpha
        * weights
            .iter()
            .map(|w| w.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
}

/// Which data loss drives training and its inputs.
pub enum Objective<'a> {
    Classify {
        y: &'a Array2<f64>,
        mask: &'a [usize],
    },
    Embed {
        recon: &'a ReconstructionTarget,
    },
}

fn attention_backward(
    d_out: &Array2<f64>,
    conv: &Array2<f64>,
    at: &AttnTrace,
    support: &AttentionSupport,
) -> Array2<f64> {
    let n = conv.nrows();
    let d = conv.ncols();
    let mut d_conv = d_out.slice(s![.., ..d]).to_owned();
    let d_tilde = d_out.slice(s![.., d..]);
    let mut du = vec![0.0; d];
    for i in 0..n {
        let s_i = support.support(i);
        let a = &at.weights[i];
        for c in 0..d {
            let t = at.h_tilde[[i, c]];
            du[c] = d_tilde[[i, c]] * (1.0 - t * t);
        }
        // Gradient through the weighted sum and the softmax over S_i.
        let da: Vec<f64> = s_i
            .iter()
            .map(|&j| (0..d).map(|c| du[c] * conv[[j, c]]).sum())
            .collect();
        let mixed: f64 = a.iter().zip(&da).map(|(x, y)| x * y).sum();
        for (idx, &j) in s_i.iter().enumerate() {
            let a_ij = a[idx];
            let d_logit = a_ij * (da[idx] - mixed);
            for c in 0..d {
                d_conv[[j, c]] += a_ij * du[c] + d_logit * conv[[i, c]];
                d_conv[[i, c]] += d_logit * conv[[j, c]];
            }
        }
    }
    d_conv
}

/// Total loss (data term plus weight decay) and its exact gradients with
/// respect to every weight matrix, computed by reverse mode over the trace.
pub fn loss_and_gradients(
    model: &Model,
    a_norm: &Array2<f64>,
    support: Option<&AttentionSupport>,
    trace: &ForwardTrace,
    objective: &Objective,
    alpha: f64,
) -> Result<(f64, Vec<Array2<f64>>)> {
    let k = model.config.layer_count();
    if trace.layers.len() != k {
        return Err(Error::data(format!(
            "trace has {} layers but the model has {k}",
            trace.layers.len()
        )));
    }
    let z = &trace.layers[k - 1].conv;

    let (data_loss, mut d_pre) = match objective {
        Objective::Classify { y, mask } => {
            if model.config.mode != OutputMode::Classify {
                return Err(Error::config("classification loss on an embedding model"));
            }
            let loss = loss_semi_supervised(z, y, mask)?;
            // Fused softmax plus cross-entropy: dPre = Z - Y on masked rows.
            let mut d = Array2::zeros(z.dim());
            for &i in mask.iter() {
                for f in 0..z.ncols() {
                    d[[i, f]] = z[[i, f]] - y[[i, f]];
                }
            }
            (loss, d)
        }
        Objective::Embed { recon } => {
            if model.config.mode != OutputMode::Embed {
                return Err(Error::config("reconstruction loss on a classifier model"));
            }
            let loss = loss_unsupervised_with(z, recon);
            let s = z.dot(&z.t()).mapv(sigmoid);
            let mut g = Array2::zeros(s.dim());
            for ((i, j), gv) in g.indexed_iter_mut() {
                let sv = s[[i, j]];
                *gv = 2.0
                    * recon.weight_sq[[i, j]]
                    * (sv - recon.target[[i, j]])
                    * sv
                    * (1.0 - sv);
            }
            let d_z = (&g + &g.t()).dot(z);
            let mut d = d_z;
            // tanh output head.
            for ((i, j), dv) in d.indexed_iter_mut() {
                let zv = z[[i, j]];
                *dv *= 1.0 - zv * zv;
            }
            (loss, d)
        }
    };
    let total_loss = data_loss + regularization(&model.weights, alpha);

    let mut grads: Vec<Array2<f64>> = vec![Array2::zeros((0, 0)); k];
    for l in (0..k).rev() {
        let layer = &trace.layers[l];
        let t = a_norm.t().dot(&d_pre);
        grads[l] = layer.input.t().dot(&t) + &(2.0 * alpha * &model.weights[l]);
        if l == 0 {
            break;
        }
        let mut d_input = t.dot(&model.weights[l].t());
        if let Some(mask) = &layer.mask {
            d_input *= mask;
        }
        let prev = &trace.layers[l - 1];
        let mut d_conv = match &prev.attn {
            Some(at) => attention_backward(
                &d_input,
                &prev.conv,
                at,
                support.ok_or_else(|| Error::config("attention trace without support sets"))?,
            ),
            None => d_input,
        };
        // All non-output layers end in tanh.
        for ((i, j), dv) in d_conv.indexed_iter_mut() {
            let cv = prev.conv[[i, j]];
            *dv *= 1.0 - cv * cv;
        }
        d_pre = d_conv;
    }
    Ok((total_loss, grads))
}

/// Adam with bias correction; one state per weight matrix.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
}

impl AdamState {
    pub fn new(params: &[Array2<f64>], lr: f64) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: params.iter().map(|p| Array2::zeros(p.dim())).collect(),
            v: params.iter().map(|p| Array2::zeros(p.dim())).collect(),
        }
    }

    pub fn step(&mut self, params: &mut [Array2<f64>], grads: &[Array2<f64>]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::data("optimizer state does not match parameters"));
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            if p.dim() != g.dim() {
                return Err(Error::data("gradient shape does not match parameter"));
            }
            for ((pv, &gv), (mv, vv)) in p
                .iter_mut()
                .zip(g.iter())
                .zip(m.iter_mut().zip(v.iter_mut()))
            {
                *mv = self.beta1 * *mv + (1.0 - self.beta1) * gv;
                *vv = self.beta2 * *vv + (1.0 - self.beta2) * gv * gv;
                let m_hat = *mv / bc1;
                let v_hat = *vv / bc2;
                *pv -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

/// Optimization schedule knobs.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub lr: f64,
    pub max_iters: usize,
    pub weight_decay: f64,
    pub stop_window: usize,
    pub stop_rel_tol: f64,
}

impl TrainConfig {
    pub fn classify_defaults() -> Self {
        TrainConfig {
            lr: DEFAULT_CLASSIFY_LR,
            max_iters: DEFAULT_CLASSIFY_ITERS,
            weight_decay: DEFAULT_WEIGHT_DECAY,
            stop_window: EARLY_STOP_WINDOW,
            stop_rel_tol: EARLY_STOP_REL_TOL,
        }
    }

    pub fn embed_defaults() -> Self {
        TrainConfig {
            lr: DEFAULT_EMBED_LR,
            max_iters: DEFAULT_EMBED_ITERS,
            weight_decay: DEFAULT_WEIGHT_DECAY,
            stop_window: EARLY_STOP_WINDOW,
            stop_rel_tol: EARLY_STOP_REL_TOL,
        }
    }
}

/// Data the training loop consumes.
pub enum TrainTask<'a> {
    Classify {
        y: &'a Array2<f64>,
        labels: &'a [usize],
        train: &'a [usize],
        val: &'a [usize],
    },
    Embed {
        recon: &'a ReconstructionTarget,
    },
}

#[derive(Debug, Clone)]
pub struct HistoryRow {
    pub iteration: usize,
    pub train_loss: f64,
    pub val_metric: Option<f64>,
}

/// History rows as `iteration,train_loss,val_metric` CSV; the metric column
/// is empty for unsupervised runs.
pub fn history_csv(rows: &[HistoryRow]) -> String {
    let mut out = String::from("iteration,train_loss,val_metric\n");
    for r in rows {
        match r.val_metric {
            Some(v) => writeln!(out, "{},{},{}", r.iteration, r.train_loss, v),
            None => writeln!(out, "{},{},", r.iteration, r.train_loss),
        }
        .expect("string write");
    }
    out
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub model: Model,
    pub history: Vec<HistoryRow>,
    /// Iteration whose weights the returned classifier carries.
    pub best_iteration: Option<usize>,
    pub best_val: Option<f64>,
    /// Worst attention row-sum deviation from 1 seen in any forward pass.
    pub max_attention_row_error: f64,
}

/// Full-batch training: Adam on the chosen loss, dropout each iteration,
/// validation-accuracy model selection for classification, windowed
/// relative-change early stopping for embeddings.
pub fn train(
    mut model: Model,
    x: &Array2<f64>,
    a_norm: &Array2<f64>,
    support: Option<&AttentionSupport>,
    task: &TrainTask,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if cfg.lr <= 0.0 || cfg.max_iters == 0 {
        return Err(Error::config(format!(
            "need lr > 0 and max_iters > 0, got lr = {}, max_iters = {}",
            cfg.lr, cfg.max_iters
        )));
    }
    match (&task, model.config.mode) {
        (TrainTask::Classify { .. }, OutputMode::Classify) => {}
        (TrainTask::Embed { .. }, OutputMode::Embed) => {}
        _ => {
            return Err(Error::config(
                "training task does not match the model's output mode",
            ))
        }
    }

    let mut dropout_rng = ChaCha8Rng::seed_from_u64(model.config.seed.wrapping_add(1));
    let mut adam = AdamState::new(&model.weights, cfg.lr);
    let mut history: Vec<HistoryRow> = Vec::with_capacity(cfg.max_iters);
    let mut best_weights: Option<Vec<Array2<f64>>> = None;
    let mut best_val = f64::NEG_INFINITY;
    let mut best_iteration = 0usize;
    let mut attn_err = 0.0f64;

    for it in 1..=cfg.max_iters {
        let iter_ctx = |e: Error| e.in_stage(&format!("iteration {it}"));
        let (_, trace) = forward(&model, x, a_norm, support, Phase::Train(&mut dropout_rng))
            .map_err(iter_ctx)?;
        attn_err = attn_err.max(trace.max_attention_row_error());
        let objective = match task {
            TrainTask::Classify { y, train, .. } => Objective::Classify { y, mask: train },
            TrainTask::Embed { recon } => Objective::Embed { recon },
        };
        let (loss, grads) = loss_and_gradients(
            &model,
            a_norm,
            support,
            &trace,
            &objective,
            cfg.weight_decay,
        )
        .map_err(iter_ctx)?;
        if !loss.is_finite() {
            return Err(Error::numeric(format!(
                "training diverged: loss is not finite at iteration {it}"
            )));
        }
        adam.step(&mut model.weights, &grads).map_err(iter_ctx)?;
        if model
            .weights
            .iter()
            .any(|w| w.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::numeric(format!(
                "training diverged: non-finite weights after iteration {it}"
            )));
        }

        match task {
            TrainTask::Classify { labels, val, .. } => {
                let (z, eval_trace) =
                    forward(&model, x, a_norm, support, Phase::Eval).map_err(iter_ctx)?;
                attn_err = attn_err.max(eval_trace.max_attention_row_error());
                let val_acc = accuracy(&z, labels, val).map_err(iter_ctx)?;
                if val_acc > best_val {
                    best_val = val_acc;
                    best_iteration = it;
                    best_weights = Some(model.weights.clone());
                }
                history.push(HistoryRow {
                    iteration: it,
                    train_loss: loss,
                    val_metric: Some(val_acc),
                });
            }
            TrainTask::Embed { .. } => {
                history.push(HistoryRow {
                    iteration: it,
                    train_loss: loss,
                    val_metric: None,
                });
                if it > cfg.stop_window {
                    let prev = history[it - 1 - cfg.stop_window].train_loss;
                    let rel = (loss - prev).abs() / prev.abs().max(1e-12);
                    if rel < cfg.stop_rel_tol {
                        break;
                    }
                }
            }
        }
    }

    let (best_iteration, best_val) = match task {
        TrainTask::Classify { .. } => {
            model.weights = best_weights.expect("max_iters >= 1 recorded a snapshot");
            (Some(best_iteration), Some(best_val))
        }
        TrainTask::Embed { .. } => (None, None),
    };
    Ok(TrainOutcome {
        model,
        history,
        best_iteration,
        best_val,
        max_attention_row_error: attn_err,
    })
}
