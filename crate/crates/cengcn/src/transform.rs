//! Adjacency transformation: reweight edges by centrality according to the
//! similarity sign and install centrality self-connections.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;

use crate::centrality::CentralityProfile;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labelprop::SimilaritySign;

/// Positive edge weights never drop below this floor, so row sums stay
/// safely nonzero under extreme centrality with strongly negative q.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// Which f_B branch edges take: `Full` follows the similarity sign,
/// the other two force one branch everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ablation {
    Full,
    IncreaseOnly,
    DecreaseOnly,
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ablation::Full => write!(f, "full"),
            Ablation::IncreaseOnly => write!(f, "increase_only"),
            Ablation::DecreaseOnly => write!(f, "decrease_only"),
        }
    }
}

impl FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Ablation::Full),
            "increase_only" => Ok(Ablation::IncreaseOnly),
            "decrease_only" => Ok(Ablation::DecreaseOnly),
            other => Err(Error::config(format!(
                "unknown ablation '{other}' (expected full, increase_only, or decrease_only)"
            ))),
        }
    }
}

/// Edge reweighting: positive-sign edges amplify by the endpoint
/// centralities to the power p, negative-sign edges dampen with power q.
/// Results on a positive base weight are floored at [`WEIGHT_FLOOR`] (the
/// damping branch can underflow all the way to zero); an exactly zero base
/// weight stays zero.
pub fn f_b(a_ij: f64, fc_i: f64, fc_j: f64, s_ij: i8, p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) || !(q < 0.0) {
        return Err(Error::config(format!(
            "need p > 0 and q < 0, got p = {p}, q = {q}"
        )));
    }
    if s_ij != 1 && s_ij != -1 {
        return Err(Error::data(format!("similarity sign must be +1 or -1, got {s_ij}")));
    }
    let e = if s_ij == 1 { p } else { q };
    let w = a_ij * fc_i.powf(e) * fc_j.powf(e);
    Ok(if a_ij > 0.0 { w.max(WEIGHT_FLOOR) } else { 0.0 })
}

/// The transformed adjacency: original sparsity off the diagonal with
/// reweighted edges, and f_C values on the diagonal.
#[derive(Debug, Clone)]
pub struct TransformedAdjacency {
    n: usize,
    pub p: f64,
    pub q: f64,
    pub ablation: Ablation,
    diag: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransformedAdjacency {
    fn assemble(
        n: usize,
        p: f64,
        q: f64,
        ablation: Ablation,
        diag: Vec<f64>,
        edges: Vec<(usize, usize, f64)>,
    ) -> Self {
        let mut rows = vec![Vec::new(); n];
        for &(i, j, w) in &edges {
            rows[i].push((j, w));
            rows[j].push((i, w));
        }
        for row in &mut rows {
            row.sort_by_key(|&(j, _)| j);
        }
        TransformedAdjacency {
            n,
            p,
            q,
            ablation,
            diag,
            edges,
            rows,
        }
    }

    /// The untransformed baseline: original edge weights with unit
    /// self-connections (A + I).
    pub fn identity_plus(graph: &Graph) -> Self {
        Self::assemble(
            graph.n(),
            1.0,
            -1.0,
            Ablation::Full,
            vec![1.0; graph.n()],
            graph.edges().to_vec(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal edges in canonical (i < j) order.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Off-diagonal neighbors of `i`, sorted by vertex id.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Full row sum including the diagonal entry.
    pub fn row_sum(&self, i: usize) -> f64 {
        self.diag[i] + self.rows[i].iter().map(|&(_, w)| w).sum::<f64>()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            a[[i, i]] = self.diag[i];
        }
        for &(i, j, w) in &self.edges {
            a[[i, j]] = w;
            a[[j, i]] = w;
        }
        a
    }

    /// Export reweighted edges as `i j w` (loadable as a weighted edge
    /// list) and the diagonal as `i w` in a companion file.
    pub fn write_files(&self, edges_path: &Path, diag_path: &Path) -> Result<()> {
        let mut out = String::new();
        for &(i, j, w) in &self.edges {
            writeln!(out, "{i} {j} {w}").expect("string write");
        }
        fs::write(edges_path, out)?;
        let mut out = String::new();
        for (i, w) in self.diag.iter().enumerate() {
            writeln!(out, "{i} {w}").expect("string write");
        }
        fs::write(diag_path, out)?;
        Ok(())
    }
}

/// Apply the case equation edgewise: diagonal from f_C, off-diagonal from
/// f_B under the (possibly ablation-forced) similarity sign.
pub fn transform_graph(
    graph: &Graph,
    profile: &CentralityProfile,
    signs: &SimilaritySign,
    p: f64,
    q: f64,
    ablation: Ablation,
) -> Result<TransformedAdjacency> {
    if profile.n() != graph.n() {
        return Err(Error::data(format!(
            "centrality profile has {} vertices but graph has {}",
            profile.n(),
            graph.n()
        )));
    }
    let mut edges = Vec::with_capacity(graph.edge_count());
    for &(i, j, a_ij) in graph.edges() {
        let s = match ablation {
            Ablation::Full => signs.sign(i, j).ok_or_else(|| {
                Error::data(format!("similarity sign missing for edge ({i}, {j})"))
            })?,
            Ablation::IncreaseOnly => 1,
            Ablation::DecreaseOnly => -1,
        };
        let w = f_b(a_ij, profile.f_c(i), profile.f_c(j), s, p, q)?;
        edges.push((i, j, w));
    }
    Ok(TransformedAdjacency::assemble(
        graph.n(),
        p,
        q,
        ablation,
        profile.fc.clone(),
        edges,
    ))
}
