//! Graph representation, dataset I/O, synthetic scale-free generation,
//! power-law diagnostics, and experiment splits.
//!
//! Graphs are undirected, weighted, and simple: no self-loops, no parallel
//! edges. Vertex ids are contiguous `0..n`; loaders remap arbitrary file ids
//! (numerically sorted when every id is an unsigned integer, lexicographically
//! otherwise) and retain the mapping.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Undirected weighted simple graph with contiguous 0-based vertex ids.
///
/// Immutable after construction; `degree[i]` is the weighted row sum of the
/// adjacency matrix.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    adj: Vec<Vec<(usize, f64)>>,
    degree: Vec<f64>,
}

impl Graph {
    /// Build a graph from canonical weighted edges. Rejects self-loops,
    /// duplicate edges, out-of-range endpoints, and non-finite or negative
    /// weights.
    pub fn from_weighted_edges(n: usize, input: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::data("empty graph: vertex count is zero"));
        }
        let mut seen = HashSet::with_capacity(input.len());
        let mut edges = Vec::with_capacity(input.len());
        for &(a, b, w) in input {
            if a == b {
                return Err(Error::data(format!("self-loop on vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::data(format!(
                    "edge ({a}, {b}) out of range for {n} vertices"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::data(format!("edge ({a}, {b}) has invalid weight {w}")));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(Error::data(format!("duplicate edge ({}, {})", key.0, key.1)));
            }
            edges.push((key.0, key.1, w));
        }
        edges.sort_by_key(|&(i, j, _)| (i, j));

        let mut adj = vec![Vec::new(); n];
        let mut degree = vec![0.0; n];
        for &(a, b, w) in &edges {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(j, _)| j);
        }
        for i in 0..n {
            degree[i] = adj[i].iter().map(|&(_, w)| w).sum();
        }
        Ok(Graph { n, edges, adj, degree })
    }

    /// Build an unweighted graph (every edge weight 1.0).
    pub fn from_edges(n: usize, input: &[(usize, usize)]) -> Result<Self> {
        let weighted: Vec<(usize, usize, f64)> =
            input.iter().map(|&(a, b)| (a, b, 1.0)).collect();
        Self::from_weighted_edges(n, &weighted)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list: `(i, j, w)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Neighbors of `i` as `(vertex, weight)`, sorted by vertex id.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.degree[i]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degree
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search_by_key(&j, |&(v, _)| v).is_ok()
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.adj[i]
            .binary_search_by_key(&j, |&(v, _)| v)
            .ok()
            .map(|idx| self.adj[i][idx].1)
    }

    /// Dense symmetric adjacency matrix with zero diagonal.
    pub fn dense_adjacency(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for &(i, j, w) in &self.edges {
            a[[i, j]] = w;
            a[[j, i]] = w;
        }
        a
    }

    /// Write the edge list as `i j w` lines. Isolated vertices do not
    /// survive a dump/load round trip; the edge set does, exactly.
    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for &(i, j, w) in &self.edges {
            writeln!(out, "{i} {j} {w}").expect("string write");
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// Result of loading an edge-list file: the graph, the original vertex ids
/// indexed by remapped id, and counts of lines dropped by cleanup.
#[derive(Debug)]
pub struct LoadReport {
    pub graph: Graph,
    pub vertex_ids: Vec<String>,
    pub duplicate_edges: usize,
    pub self_loops_dropped: usize,
}

fn split_line(line: &str, delimiter: Option<char>) -> Vec<&str> {
    match delimiter {
        Some(c) => line.split(c).map(str::trim).filter(|t| !t.is_empty()).collect(),
        None => line.split_whitespace().collect(),
    }
}

/// Strip a trailing `#` comment and surrounding whitespace.
fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => line[..pos].trim(),
        None => line.trim(),
    }
}

/// Load an edge list: one edge per line as `src dst [weight]`, `#` comments,
/// whitespace- or single-character-delimited. Duplicate and reversed edges are
/// deduplicated (first weight wins) and self-loops dropped; both are counted
/// in the report.
pub fn load_edge_list(path: &Path, delimiter: Option<char>) -> Result<LoadReport> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;

    let mut raw: Vec<(String, String, f64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = strip_comment(line);
        if line.is_empty() {
            continue;
        }
        let tokens = split_line(line, delimiter);
        let (a, b, w) = match tokens.as_slice() {
            [a, b] => (*a, *b, 1.0),
            [a, b, w] => {
                let w: f64 = w.parse().map_err(|_| {
                    Error::data(format!(
                        "{}:{}: invalid weight '{}'",
                        path.display(),
                        lineno + 1,
                        w
                    ))
                })?;
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::data(format!(
                        "{}:{}: weight {} out of range",
                        path.display(),
                        lineno + 1,
                        w
                    )));
                }
                (*a, *b, w)
            }
            _ => {
                return Err(Error::data(format!(
                    "{}:{}: expected 'src dst [weight]', got {} fields",
                    path.display(),
                    lineno + 1,
                    tokens.len()
                )))
            }
        };
        raw.push((a.to_string(), b.to_string(), w));
    }

    if raw.is_empty() {
        return Err(Error::data(format!("{}: empty graph", path.display())));
    }

    // Remap ids: numeric order when every id parses as an unsigned integer,
    // lexicographic otherwise. Ids on dropped self-loop lines still register.
    let mut ids: Vec<&str> = raw
        .iter()
        .flat_map(|(a, b, _)| [a.as_str(), b.as_str()])
        .collect();
    ids.sort_unstable();
    ids.dedup();
    let all_numeric = ids.iter().all(|s| s.parse::<u64>().is_ok());
    let mut vertex_ids: Vec<String> = ids.iter().map(|s| s.to_string()).collect();
    if all_numeric {
        vertex_ids.sort_by_key(|s| s.parse::<u64>().unwrap());
    }
    let index: HashMap<&str, usize> = vertex_ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();

    let n = vertex_ids.len();
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    let mut duplicate_edges = 0usize;
    let mut self_loops_dropped = 0usize;
    for (a, b, w) in &raw {
        let (i, j) = (index[a.as_str()], index[b.as_str()]);
        if i == j {
            self_loops_dropped += 1;
            continue;
        }
        let key = (i.min(j), i.max(j));
        if seen.insert(key) {
            edges.push((key.0, key.1, *w));
        } else {
            duplicate_edges += 1;
        }
    }
    if self_loops_dropped > 0 {
        log::warn!(
            "{}: dropped {} self-loop(s)",
            path.display(),
            self_loops_dropped
        );
    }
    if edges.is_empty() {
        return Err(Error::data(format!(
            "{}: no edges left after cleanup",
            path.display()
        )));
    }

    let graph = Graph::from_weighted_edges(n, &edges)?;
    Ok(LoadReport {
        graph,
        vertex_ids,
        duplicate_edges,
        self_loops_dropped,
    })
}

/// Dense per-vertex feature matrix; rows follow remapped vertex ids.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub x: Array2<f64>,
}

impl FeatureMatrix {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }
}

/// The n-by-n identity, used when a dataset ships no features.
pub fn identity_features(n: usize) -> FeatureMatrix {
    FeatureMatrix {
        x: Array2::eye(n),
    }
}

/// Load features: one row per line, remapped vertex id then the feature
/// values. Every vertex in `0..n` must appear exactly once.
pub fn load_features(path: &Path, delimiter: Option<char>, n: usize) -> Result<FeatureMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut dim: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = strip_comment(line);
        if line.is_empty() {
            continue;
        }
        let tokens = split_line(line, delimiter);
        if tokens.len() < 2 {
            return Err(Error::data(format!(
                "{}:{}: expected 'id value...'",
                path.display(),
                lineno + 1
            )));
        }
        let id: usize = tokens[0].parse().map_err(|_| {
            Error::data(format!(
                "{}:{}: invalid vertex id '{}'",
                path.display(),
                lineno + 1,
                tokens[0]
            ))
        })?;
        if id >= n {
            return Err(Error::data(format!(
                "{}:{}: vertex id {} out of range (n = {})",
                path.display(),
                lineno + 1,
                id,
                n
            )));
        }
        let values: Vec<f64> = tokens[1..]
            .iter()
            .map(|t| {
                t.parse::<f64>().map_err(|_| {
                    Error::data(format!(
                        "{}:{}: invalid feature value '{t}'",
                        path.display(),
                        lineno + 1
                    ))
                })
            })
            .collect::<Result<_>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::data(format!(
                "{}:{}: non-finite feature value",
                path.display(),
                lineno + 1
            )));
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(Error::data(format!(
                    "{}:{}: feature width {} != {}",
                    path.display(),
                    lineno + 1,
                    values.len(),
                    d
                )))
            }
            _ => {}
        }
        rows.push((id, values));
    }
    if rows.len() != n {
        return Err(Error::data(format!(
            "{}: row-count mismatch: {} rows for {} vertices",
            path.display(),
            rows.len(),
            n
        )));
    }
    let m = dim.unwrap_or(0);
    let mut x = Array2::zeros((n, m));
    let mut seen = vec![false; n];
    for (id, values) in rows {
        if seen[id] {
            return Err(Error::data(format!(
                "{}: duplicate feature row for vertex {id}",
                path.display()
            )));
        }
        seen[id] = true;
        for (j, v) in values.into_iter().enumerate() {
            x[[id, j]] = v;
        }
    }
    Ok(FeatureMatrix { x })
}

/// Per-vertex class labels over `classes` classes; `mask` holds the labeled
/// vertex indices, sorted. `y[i]` is meaningful only for `i` in `mask`.
#[derive(Debug, Clone)]
pub struct LabelVector {
    pub y: Vec<usize>,
    pub classes: usize,
    pub mask: Vec<usize>,
}

impl LabelVector {
    pub fn new(y: Vec<usize>, classes: usize, mut mask: Vec<usize>) -> Result<Self> {
        mask.sort_unstable();
        mask.dedup();
        if let Some(&last) = mask.last() {
            if last >= y.len() {
                return Err(Error::data(format!(
                    "labeled vertex {last} out of range (n = {})",
                    y.len()
                )));
            }
        }
        for &i in &mask {
            if y[i] >= classes {
                return Err(Error::data(format!(
                    "vertex {i} has class {} >= class count {classes}",
                    y[i]
                )));
            }
        }
        Ok(LabelVector { y, classes, mask })
    }

    /// Labels for every vertex in `0..n` (fully labeled).
    pub fn full(y: Vec<usize>, classes: usize) -> Result<Self> {
        let mask = (0..y.len()).collect();
        Self::new(y, classes, mask)
    }
}

/// Load labels: one `vertex_id class_id` pair per line, remapped ids. Class
/// count is the maximum class id plus one. Vertices absent from the file are
/// unlabeled.
pub fn load_labels(path: &Path, delimiter: Option<char>, n: usize) -> Result<LabelVector> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut y = vec![0usize; n];
    let mut mask = Vec::new();
    let mut seen = vec![false; n];
    let mut classes = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = strip_comment(line);
        if line.is_empty() {
            continue;
        }
        let tokens = split_line(line, delimiter);
        if tokens.len() != 2 {
            return Err(Error::data(format!(
                "{}:{}: expected 'vertex_id class_id'",
                path.display(),
                lineno + 1
            )));
        }
        let id: usize = tokens[0].parse().map_err(|_| {
            Error::data(format!(
                "{}:{}: invalid vertex id '{}'",
                path.display(),
                lineno + 1,
                tokens[0]
            ))
        })?;
        let class: usize = tokens[1].parse().map_err(|_| {
            Error::data(format!(
                "{}:{}: invalid class id '{}'",
                path.display(),
                lineno + 1,
                tokens[1]
            ))
        })?;
        if id >= n {
            return Err(Error::data(format!(
                "{}:{}: vertex id {id} out of range (n = {n})",
                path.display(),
                lineno + 1
            )));
        }
        if seen[id] {
            return Err(Error::data(format!(
                "{}:{}: duplicate label for vertex {id}",
                path.display(),
                lineno + 1
            )));
        }
        seen[id] = true;
        y[id] = class;
        classes = classes.max(class + 1);
        mask.push(id);
    }
    if mask.is_empty() {
        return Err(Error::data(format!("{}: no labels", path.display())));
    }
    LabelVector::new(y, classes, mask)
}

/// Disjoint train/validation/test index sets over the labeled vertices.
#[derive(Debug, Clone)]
pub struct DataSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Uniformly shuffle the labeled vertices and cut train/validation/test
/// fractions, deterministic given `seed`. Sizes are floored; the remainder
/// is the test set.
pub fn split_vertices(
    labels: &LabelVector,
    train_frac: f64,
    val_frac: f64,
    seed: u64,
) -> Result<DataSplit> {
    if !(0.0..1.0).contains(&train_frac) || !(0.0..1.0).contains(&val_frac) {
        return Err(Error::config("split fractions must lie in [0, 1)"));
    }
    if train_frac + val_frac >= 1.0 {
        return Err(Error::config(format!(
            "train_frac + val_frac = {} must be < 1",
            train_frac + val_frac
        )));
    }
    if labels.mask.is_empty() {
        return Err(Error::data("no labeled vertices to split"));
    }
    let mut order = labels.mask.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let l = order.len();
    let n_train = (l as f64 * train_frac).floor() as usize;
    let n_val = (l as f64 * val_frac).floor() as usize;
    if n_train == 0 {
        return Err(Error::config(format!(
            "train split is empty ({l} labeled vertices, train_frac = {train_frac})"
        )));
    }
    if n_val == 0 {
        return Err(Error::config(format!(
            "validation split is empty ({l} labeled vertices, val_frac = {val_frac})"
        )));
    }
    let train = order[..n_train].to_vec();
    let validation = order[n_train..n_train + n_val].to_vec();
    let test = order[n_train + n_val..].to_vec();
    Ok(DataSplit {
        train,
        validation,
        test,
    })
}

/// Link-prediction split: residual training graph plus held-out positive
/// edges and sampled negative (absent) pairs of equal count.
#[derive(Debug, Clone)]
pub struct LinkSplit {
    pub residual: Graph,
    pub positives: Vec<(usize, usize)>,
    pub negatives: Vec<(usize, usize)>,
}

/// Sample vertex pairs absent from `graph`, excluding `avoid`, without
/// duplicates or self-pairs. Gives up after `100 * count` rejections.
pub fn sample_non_edges(
    graph: &Graph,
    count: usize,
    avoid: &HashSet<(usize, usize)>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, usize)>> {
    let n = graph.n();
    let mut picked = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    let cap = count.saturating_mul(100);
    let mut attempts = 0usize;
    while out.len() < count {
        if attempts >= cap {
            return Err(Error::data(format!(
                "graph too dense for negative sampling: found {} of {} non-edges \
                 after {} attempts",
                out.len(),
                count,
                attempts
            )));
        }
        attempts += 1;
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j {
            continue;
        }
        let key = (i.min(j), i.max(j));
        if graph.has_edge(key.0, key.1) || avoid.contains(&key) || picked.contains(&key) {
            continue;
        }
        picked.insert(key);
        out.push(key);
    }
    Ok(out)
}

/// Hide `floor(hide_frac * |E|)` edges uniformly as positives and sample as
/// many non-edges as negatives. The residual graph keeps all vertices.
pub fn sample_link_split(graph: &Graph, hide_frac: f64, seed: u64) -> Result<LinkSplit> {
    if !(hide_frac > 0.0 && hide_frac < 1.0) {
        return Err(Error::config(format!(
            "hide_frac must lie in (0, 1), got {hide_frac}"
        )));
    }
    let e = graph.edge_count();
    let n_hide = (e as f64 * hide_frac).floor() as usize;
    if n_hide == 0 {
        return Err(Error::data(format!(
            "hide_frac {hide_frac} hides zero of {e} edges"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..e).collect();
    order.shuffle(&mut rng);
    let hidden: HashSet<usize> = order[..n_hide].iter().copied().collect();

    let mut residual_edges = Vec::with_capacity(e - n_hide);
    let mut positives = Vec::with_capacity(n_hide);
    for (idx, &(i, j, w)) in graph.edges().iter().enumerate() {
        if hidden.contains(&idx) {
            positives.push((i, j));
        } else {
            residual_edges.push((i, j, w));
        }
    }
    let negatives = sample_non_edges(graph, n_hide, &HashSet::new(), &mut rng)?;
    let residual = Graph::from_weighted_edges(graph.n(), &residual_edges)?;
    Ok(LinkSplit {
        residual,
        positives,
        negatives,
    })
}

/// Preferential-attachment generator: a clique on `m_attach + 1` seed
/// vertices, then each new vertex attaches `m_attach` edges to distinct
/// targets chosen with probability proportional to current degree.
pub fn generate_scale_free(n: usize, m_attach: usize, seed: u64) -> Result<Graph> {
    if m_attach < 1 {
        return Err(Error::config("m_attach must be >= 1"));
    }
    if n <= m_attach {
        return Err(Error::config(format!(
            "need n > m_attach, got n = {n}, m_attach = {m_attach}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    // One entry per endpoint; sampling an index uniformly is degree-weighted.
    let mut endpoint_pool: Vec<usize> = Vec::new();

    let seed_count = m_attach + 1;
    for i in 0..seed_count {
        for j in (i + 1)..seed_count {
            edges.push((i, j));
            endpoint_pool.push(i);
            endpoint_pool.push(j);
        }
    }

    for v in seed_count..n {
        let mut targets = HashSet::with_capacity(m_attach);
        while targets.len() < m_attach {
            let pick = endpoint_pool[rng.random_range(0..endpoint_pool.len())];
            targets.insert(pick);
        }
        let mut targets: Vec<usize> = targets.into_iter().collect();
        targets.sort_unstable();
        for t in targets {
            edges.push((v, t));
            endpoint_pool.push(v);
            endpoint_pool.push(t);
        }
    }
    Graph::from_edges(n, &edges)
}

/// Scale-free graph with planted communities: one preferential-attachment
/// block per community plus `inter_frac * |within|` random cross edges.
/// Returns the graph and community labels on every vertex.
pub fn generate_planted_partition(
    n: usize,
    communities: usize,
    m_attach: usize,
    inter_frac: f64,
    seed: u64,
) -> Result<(Graph, LabelVector)> {
    if communities < 2 {
        return Err(Error::config("need at least 2 communities"));
    }
    if !(0.0..1.0).contains(&inter_frac) {
        return Err(Error::config("inter_frac must lie in [0, 1)"));
    }
    let base = n / communities;
    if base <= m_attach {
        return Err(Error::config(format!(
            "community size {base} must exceed m_attach = {m_attach}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut labels = vec![0usize; n];
    let mut offset = 0usize;
    for k in 0..communities {
        let size = if k + 1 == communities { n - offset } else { base };
        let block_seed = rng.random::<u64>();
        let block = generate_scale_free(size, m_attach, block_seed)?;
        for &(i, j, w) in block.edges() {
            edges.push((offset + i, offset + j, w));
        }
        for i in 0..size {
            labels[offset + i] = k;
        }
        offset += size;
    }

    let within = edges.len();
    let inter_count = ((within as f64 * inter_frac).round() as usize).max(1);
    let existing: HashSet<(usize, usize)> =
        edges.iter().map(|&(i, j, _)| (i, j)).collect();
    let mut added = HashSet::new();
    let cap = inter_count * 100;
    let mut attempts = 0usize;
    while added.len() < inter_count {
        if attempts >= cap {
            return Err(Error::data(format!(
                "could not place {inter_count} cross-community edges \
                 (placed {} after {attempts} attempts)",
                added.len()
            )));
        }
        attempts += 1;
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j || labels[i] == labels[j] {
            continue;
        }
        let key = (i.min(j), i.max(j));
        if existing.contains(&key) || added.contains(&key) {
            continue;
        }
        added.insert(key);
    }
    let mut cross: Vec<(usize, usize)> = added.into_iter().collect();
    cross.sort_unstable();
    for (i, j) in cross {
        edges.push((i, j, 1.0));
    }

    let graph = Graph::from_weighted_edges(n, &edges)?;
    let label_vec = LabelVector::full(labels, communities)?;
    Ok((graph, label_vec))
}

/// Continuous maximum-likelihood power-law exponent over the degrees at or
/// above `d_min`: `1 + k / sum(ln(d_i / d_min))`. Returns infinity (with a
/// warning) when every qualifying degree equals `d_min`.
pub fn estimate_power_law_alpha(degrees: &[f64], d_min: f64) -> Result<f64> {
    if d_min <= 0.0 {
        return Err(Error::config(format!("d_min must be > 0, got {d_min}")));
    }
    let mut k = 0usize;
    let mut log_sum = 0.0;
    for &d in degrees {
        if d >= d_min {
            k += 1;
            log_sum += (d / d_min).ln();
        }
    }
    if k < 10 {
        return Err(Error::data(format!(
            "need at least 10 degrees >= d_min = {d_min}, found {k}"
        )));
    }
    if log_sum <= 0.0 {
        log::warn!("all {k} qualifying degrees equal d_min = {d_min}; alpha is unbounded");
        return Ok(f64::INFINITY);
    }
    Ok(1.0 + k as f64 / log_sum)
}
