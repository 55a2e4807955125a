//! Run configuration: a flat key=value text format with optional sections,
//! typed validation, and canonical manifests that reproduce a run
//! bit-identically.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::centrality::CentralityMeasure;
use crate::engine::{
    Normalization, OutputMode, DEFAULT_CLASSIFY_ITERS, DEFAULT_CLASSIFY_LR, DEFAULT_DROPOUT_KEEP,
    DEFAULT_EMBED_ITERS, DEFAULT_EMBED_LR, DEFAULT_RHO, DEFAULT_WEIGHT_DECAY,
};
use crate::error::{Error, Result};
use crate::eval::EvalTask;
use crate::labelprop::DEFAULT_PROPAGATION_STEPS;
use crate::transform::Ablation;

pub const DEFAULT_P: f64 = 1.0;
pub const DEFAULT_Q: f64 = -1.0;
pub const DEFAULT_HUB_RATE: f64 = 0.02;
pub const DEFAULT_TRAIN_FRAC: f64 = 0.1;
pub const DEFAULT_VAL_FRAC: f64 = 0.1;
pub const DEFAULT_HIDE_FRAC: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 1;
/// Environment variable consulted for the default output directory.
pub const OUTPUT_DIR_ENV: &str = "CENGCN_OUT_DIR";

/// Pipeline variant selector. The letter suffix of the coded forms names
/// the centrality measure (D = degree, E = eigenvector).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationMode {
    /// Full pipeline: transformed adjacency and hub attention.
    Full,
    /// Hub attention disabled (TD/TE).
    NoAttention(CentralityMeasure),
    /// Transform disabled, convolution runs on A + I (AD/AE).
    PlainAdjacency(CentralityMeasure),
    /// Only weight increases applied (WD/WE).
    IncreaseOnly(CentralityMeasure),
    /// Only weight decreases applied (ID/IE).
    DecreaseOnly(CentralityMeasure),
    /// Plain baseline: A + I and no attention.
    VanillaGcn,
}

impl fmt::Display for AblationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use CentralityMeasure::{Degree, Eigenvector};
        let code = match self {
            AblationMode::Full => "full",
            AblationMode::NoAttention(Degree) => "TD",
            AblationMode::NoAttention(Eigenvector) => "TE",
            AblationMode::PlainAdjacency(Degree) => "AD",
            AblationMode::PlainAdjacency(Eigenvector) => "AE",
            AblationMode::IncreaseOnly(Degree) => "WD",
            AblationMode::IncreaseOnly(Eigenvector) => "WE",
            AblationMode::DecreaseOnly(Degree) => "ID",
            AblationMode::DecreaseOnly(Eigenvector) => "IE",
            AblationMode::VanillaGcn => "gcn",
        };
        write!(f, "{code}")
    }
}

impl FromStr for AblationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use CentralityMeasure::{Degree, Eigenvector};
        Ok(match s {
            "full" => AblationMode::Full,
            "TD" => AblationMode::NoAttention(Degree),
            "TE" => AblationMode::NoAttention(Eigenvector),
            "AD" => AblationMode::PlainAdjacency(Degree),
            "AE" => AblationMode::PlainAdjacency(Eigenvector),
            "WD" => AblationMode::IncreaseOnly(Degree),
            "WE" => AblationMode::IncreaseOnly(Eigenvector),
            "ID" => AblationMode::DecreaseOnly(Degree),
            "IE" => AblationMode::DecreaseOnly(Eigenvector),
            "gcn" => AblationMode::VanillaGcn,
            other => {
                return Err(Error::config(format!(
                    "unknown ablation '{other}' (expected full, TD, TE, AD, AE, WD, WE, ID, IE, or gcn)"
                )))
            }
        })
    }
}

impl AblationMode {
    /// Measure fixed by the code letter, if any.
    pub fn measure_override(&self) -> Option<CentralityMeasure> {
        match self {
            AblationMode::Full | AblationMode::VanillaGcn => None,
            AblationMode::NoAttention(m)
            | AblationMode::PlainAdjacency(m)
            | AblationMode::IncreaseOnly(m)
            | AblationMode::DecreaseOnly(m) => Some(*m),
        }
    }

    pub fn attention_enabled(&self) -> bool {
        !matches!(
            self,
            AblationMode::NoAttention(_) | AblationMode::VanillaGcn
        )
    }

    /// How the adjacency is built: Some(kind) runs the weighted transform,
    /// None uses A + I.
    pub fn transform_kind(&self) -> Option<Ablation> {
        match self {
            AblationMode::Full | AblationMode::NoAttention(_) => Some(Ablation::Full),
            AblationMode::IncreaseOnly(_) => Some(Ablation::IncreaseOnly),
            AblationMode::DecreaseOnly(_) => Some(Ablation::DecreaseOnly),
            AblationMode::PlainAdjacency(_) | AblationMode::VanillaGcn => None,
        }
    }
}

/// All knobs for one run. Parsed from key=value text; `finalize` resolves
/// defaults and validates, after which `manifest` emits a canonical echo
/// that reparses to the same configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub graph: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub delimiter: Option<char>,
    pub generate_n: Option<usize>,
    pub generate_m: usize,
    pub generate_communities: usize,
    pub generate_inter_frac: f64,
    pub measure: Option<CentralityMeasure>,
    /// Hub fraction in (0, 1); 0.02 selects the top 2%.
    pub hub_rate: f64,
    pub p: f64,
    pub q: f64,
    pub steps: usize,
    pub ablation: AblationMode,
    pub hidden: Vec<usize>,
    pub embed_dim: usize,
    pub mode: OutputMode,
    pub normalization: Normalization,
    pub dropout_keep: f64,
    pub weight_decay: f64,
    pub rho: f64,
    pub lr: Option<f64>,
    pub iterations: Option<usize>,
    pub train_frac: f64,
    pub val_frac: f64,
    pub hide_frac: f64,
    pub clusters: Option<usize>,
    pub task: EvalTask,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            graph: None,
            features: None,
            labels: None,
            delimiter: None,
            generate_n: None,
            generate_m: 2,
            generate_communities: 2,
            generate_inter_frac: 0.05,
            measure: None,
            hub_rate: DEFAULT_HUB_RATE,
            p: DEFAULT_P,
            q: DEFAULT_Q,
            steps: DEFAULT_PROPAGATION_STEPS,
            ablation: AblationMode::Full,
            hidden: vec![16],
            embed_dim: 128,
            mode: OutputMode::Classify,
            normalization: Normalization::Row,
            dropout_keep: DEFAULT_DROPOUT_KEEP,
            weight_decay: DEFAULT_WEIGHT_DECAY,
            rho: DEFAULT_RHO,
            lr: None,
            iterations: None,
            train_frac: DEFAULT_TRAIN_FRAC,
            val_frac: DEFAULT_VAL_FRAC,
            hide_frac: DEFAULT_HIDE_FRAC,
            clusters: None,
            task: EvalTask::Classification,
            seed: DEFAULT_SEED,
            output_dir: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("bad value '{value}' for {key}")))
}

fn parse_delimiter(value: &str) -> Result<char> {
    match value {
        "tab" => Ok('\t'),
        "space" => Ok(' '),
        v if v.chars().count() == 1 => Ok(v.chars().next().expect("one char")),
        other => Err(Error::config(format!(
            "delimiter must be one character, 'tab', or 'space', got '{other}'"
        ))),
    }
}

fn delimiter_token(c: char) -> String {
    match c {
        '\t' => "tab".to_string(),
        ' ' => "space".to_string(),
        other => other.to_string(),
    }
}

fn parse_width_list(value: &str) -> Result<Vec<usize>> {
    value
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::config(format!("bad width '{t}' in hidden")))
        })
        .collect()
}

impl RunConfig {
    /// Parse flat key=value text. `[section]` headers and `#` comments are
    /// allowed and carry no meaning; keys live in one namespace and may not
    /// repeat.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                continue;
            }
            let line_err = |msg: String| Error::config(format!("line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| line_err(format!("expected key = value, got '{line}'")))?;
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(line_err(format!("duplicate key '{key}'")));
            }
            seen.push(key.to_string());
            cfg.set(key, value).map_err(|e| match e {
                Error::Config(m) => Error::config(format!("line {}: {m}", lineno + 1)),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text).map_err(|e| e.in_stage(&path.display().to_string()))
    }

    /// Apply one key=value assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "graph" => self.graph = Some(PathBuf::from(value)),
            "features" => self.features = Some(PathBuf::from(value)),
            "labels" => self.labels = Some(PathBuf::from(value)),
            "delimiter" => self.delimiter = Some(parse_delimiter(value)?),
            "generate_n" => self.generate_n = Some(parse_value(key, value)?),
            "generate_m" => self.generate_m = parse_value(key, value)?,
            "generate_communities" => self.generate_communities = parse_value(key, value)?,
            "generate_inter_frac" => self.generate_inter_frac = parse_value(key, value)?,
            "measure" => self.measure = Some(value.parse()?),
            "hub_rate" => self.hub_rate = parse_value(key, value)?,
            "p" => self.p = parse_value(key, value)?,
            "q" => self.q = parse_value(key, value)?,
            "steps" => self.steps = parse_value(key, value)?,
            "ablation" => self.ablation = value.parse()?,
            "hidden" => self.hidden = parse_width_list(value)?,
            "embed_dim" => self.embed_dim = parse_value(key, value)?,
            "mode" => self.mode = value.parse()?,
            "normalization" => self.normalization = value.parse()?,
            "dropout_keep" => self.dropout_keep = parse_value(key, value)?,
            "weight_decay" => self.weight_decay = parse_value(key, value)?,
            "rho" => self.rho = parse_value(key, value)?,
            "lr" => self.lr = Some(parse_value(key, value)?),
            "iterations" => self.iterations = Some(parse_value(key, value)?),
            "train_frac" => self.train_frac = parse_value(key, value)?,
            "val_frac" => self.val_frac = parse_value(key, value)?,
            "hide_frac" => self.hide_frac = parse_value(key, value)?,
            "clusters" => self.clusters = Some(parse_value(key, value)?),
            "task" => self.task = value.parse()?,
            "seed" => self.seed = parse_value(key, value)?,
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            other => return Err(Error::config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Resolve every default (learning rate, iterations, measure, output
    /// directory from the environment) and validate all invariants. Must be
    /// called before the configuration is used or echoed.
    pub fn finalize(&mut self) -> Result<()> {
        self.finalize_with_env(std::env::var(OUTPUT_DIR_ENV).ok().as_deref())
    }

    /// `finalize` with the environment lookup injected, for tests and
    /// callers that resolve the directory themselves.
    pub fn finalize_with_env(&mut self, env_output_dir: Option<&str>) -> Result<()> {
        if self.graph.is_none() && self.generate_n.is_none() {
            return Err(Error::config(
                "no input: set graph = <path> or generate_n = <count>",
            ));
        }
        if self.graph.is_some() && self.generate_n.is_some() {
            return Err(Error::config(
                "graph and generate_n are mutually exclusive",
            ));
        }
        if let Some(override_m) = self.ablation.measure_override() {
            match self.measure {
                Some(set) if set != override_m => {
                    return Err(Error::config(format!(
                        "ablation {} implies {} centrality but measure = {} was given",
                        self.ablation, override_m, set
                    )));
                }
                _ => self.measure = Some(override_m),
            }
        } else if self.measure.is_none() {
            self.measure = Some(CentralityMeasure::Degree);
        }
        if !(self.hub_rate > 0.0 && self.hub_rate < 1.0) {
            return Err(Error::config(format!(
                "hub_rate is a fraction in (0, 1) (0.02 selects the top 2%), got {}",
                self.hub_rate
            )));
        }
        if !(self.p > 0.0) {
            return Err(Error::config(format!("p must be > 0, got {}", self.p)));
        }
        if !(self.q < 0.0) {
            return Err(Error::config(format!("q must be < 0, got {}", self.q)));
        }
        if self.steps == 0 {
            return Err(Error::config("steps must be >= 1"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::config("hidden widths must be positive"));
        }
        if self.embed_dim == 0 {
            return Err(Error::config("embed_dim must be positive"));
        }
        if !(self.dropout_keep > 0.0 && self.dropout_keep <= 1.0) {
            return Err(Error::config(format!(
                "dropout_keep must lie in (0, 1], got {}",
                self.dropout_keep
            )));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::config(format!(
                "weight_decay must be >= 0, got {}",
                self.weight_decay
            )));
        }
        if !(self.rho > 1.0) {
            return Err(Error::config(format!("rho must be > 1, got {}", self.rho)));
        }
        if self.generate_n.is_some() {
            if self.generate_m == 0 {
                return Err(Error::config("generate_m must be >= 1"));
            }
            if self.generate_communities == 0 {
                return Err(Error::config("generate_communities must be >= 1"));
            }
            if !(self.generate_inter_frac >= 0.0) {
                return Err(Error::config("generate_inter_frac must be >= 0"));
            }
        }
        let (lr_default, iter_default) = match self.mode {
            OutputMode::Classify => (DEFAULT_CLASSIFY_LR, DEFAULT_CLASSIFY_ITERS),
            OutputMode::Embed => (DEFAULT_EMBED_LR, DEFAULT_EMBED_ITERS),
        };
        let lr = *self.lr.get_or_insert(lr_default);
        if !(lr > 0.0) {
            return Err(Error::config(format!("lr must be > 0, got {lr}")));
        }
        let iters = *self.iterations.get_or_insert(iter_default);
        if iters == 0 {
            return Err(Error::config("iterations must be >= 1"));
        }
        for (name, v) in [("train_frac", self.train_frac), ("val_frac", self.val_frac)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::config(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        if self.train_frac + self.val_frac >= 1.0 {
            return Err(Error::config(
                "train_frac + val_frac must be < 1 to leave a test set",
            ));
        }
        if !(self.hide_frac > 0.0 && self.hide_frac < 1.0) {
            return Err(Error::config(format!(
                "hide_frac must lie in (0, 1), got {}",
                self.hide_frac
            )));
        }
        if self.clusters == Some(0) {
            return Err(Error::config("clusters must be >= 1"));
        }
        if self.output_dir.is_none() {
            self.output_dir = Some(PathBuf::from(env_output_dir.unwrap_or(".")));
        }
        Ok(())
    }

    /// Hub rate in the percentage form the centrality stage consumes.
    pub fn hub_percent(&self) -> f64 {
        self.hub_rate * 100.0
    }

    pub fn resolved_measure(&self) -> CentralityMeasure {
        self.measure.expect("finalize resolves the measure")
    }

    pub fn resolved_lr(&self) -> f64 {
        self.lr.expect("finalize resolves the learning rate")
    }

    pub fn resolved_iterations(&self) -> usize {
        self.iterations.expect("finalize resolves the iteration count")
    }

    pub fn resolved_output_dir(&self) -> &Path {
        self.output_dir
            .as_deref()
            .expect("finalize resolves the output directory")
    }

    /// All layer output widths: hidden widths plus the task head (class
    /// count for classification, embed_dim otherwise).
    pub fn widths(&self, classes: usize) -> Vec<usize> {
        let mut w = self.hidden.clone();
        w.push(match self.mode {
            OutputMode::Classify => classes,
            OutputMode::Embed => self.embed_dim,
        });
        w
    }

    /// Canonical key=value echo of every resolved field. Reparsing the
    /// manifest yields a configuration that reproduces the run bit for bit.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        writeln!(out, "[data]").expect("string write");
        if let Some(p) = &self.graph {
            writeln!(out, "graph = {}", p.display()).expect("string write");
        }
        if let Some(p) = &self.features {
            writeln!(out, "features = {}", p.display()).expect("string write");
        }
        if let Some(p) = &self.labels {
            writeln!(out, "labels = {}", p.display()).expect("string write");
        }
        if let Some(c) = self.delimiter {
            writeln!(out, "delimiter = {}", delimiter_token(c)).expect("string write");
        }
        if let Some(n) = self.generate_n {
            writeln!(out, "generate_n = {n}").expect("string write");
            writeln!(out, "generate_m = {}", self.generate_m).expect("string write");
            writeln!(out, "generate_communities = {}", self.generate_communities)
                .expect("string write");
            writeln!(out, "generate_inter_frac = {}", self.generate_inter_frac)
                .expect("string write");
        }
        writeln!(out, "[transform]").expect("string write");
        writeln!(out, "measure = {}", self.resolved_measure()).expect("string write");
        writeln!(out, "hub_rate = {}", self.hub_rate).expect("string write");
        writeln!(out, "p = {}", self.p).expect("string write");
        writeln!(out, "q = {}", self.q).expect("string write");
        writeln!(out, "steps = {}", self.steps).expect("string write");
        writeln!(out, "ablation = {}", self.ablation).expect("string write");
        writeln!(out, "[model]").expect("string write");
        let hidden: Vec<String> = self.hidden.iter().map(|w| w.to_string()).collect();
        writeln!(out, "hidden = {}", hidden.join(" ")).expect("string write");
        writeln!(out, "embed_dim = {}", self.embed_dim).expect("string write");
        writeln!(out, "mode = {}", self.mode).expect("string write");
        writeln!(out, "normalization = {}", self.normalization).expect("string write");
        writeln!(out, "dropout_keep = {}", self.dropout_keep).expect("string write");
        writeln!(out, "weight_decay = {}", self.weight_decay).expect("string write");
        writeln!(out, "rho = {}", self.rho).expect("string write");
        writeln!(out, "[training]").expect("string write");
        writeln!(out, "lr = {}", self.resolved_lr()).expect("string write");
        writeln!(out, "iterations = {}", self.resolved_iterations()).expect("string write");
        writeln!(out, "train_frac = {}", self.train_frac).expect("string write");
        writeln!(out, "val_frac = {}", self.val_frac).expect("string write");
        writeln!(out, "hide_frac = {}", self.hide_frac).expect("string write");
        if let Some(k) = self.clusters {
            writeln!(out, "clusters = {k}").expect("string write");
        }
        writeln!(out, "task = {}", self.task).expect("string write");
        writeln!(out, "seed = {}", self.seed).expect("string write");
        writeln!(out, "output_dir = {}", self.resolved_output_dir().display())
            .expect("string write");
        out
    }
}
