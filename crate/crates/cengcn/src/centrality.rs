//! Vertex centrality indices, hub selection, and the f_C scaling values
//! that seed the adjacency transformation.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_EIGEN_TOL: f64 = 1e-10;
pub const DEFAULT_EIGEN_MAX_ITER: usize = 10_000;

/// Threshold below which a max-normalized eigenvector component counts as
/// zero; components this small indicate a vertex off the dominant component.
const ZERO_COMPONENT_TOL: f64 = 1e-8;

/// Centrality measure to derive the per-vertex index `c` from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentralityMeasure {
    Degree,
    Eigenvector,
}

impl fmt::Display for CentralityMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CentralityMeasure::Degree => write!(f, "degree"),
            CentralityMeasure::Eigenvector => write!(f, "eigenvector"),
        }
    }
}

impl FromStr for CentralityMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "degree" => Ok(CentralityMeasure::Degree),
            "eigenvector" => Ok(CentralityMeasure::Eigenvector),
            other => Err(Error::config(format!(
                "unknown centrality measure '{other}' (expected degree or eigenvector)"
            ))),
        }
    }
}

/// Per-vertex centrality scores with the selected hub set and f_C values.
///
/// `hubs` is sorted ascending by vertex id and always holds the
/// `max(1, floor(n * r / 100))` vertices of highest centrality, ties going
/// to the lower id. `fc[i]` is `c[i]` for hubs and 1 otherwise.
#[derive(Debug, Clone)]
pub struct CentralityProfile {
    pub c: Vec<f64>,
    pub hubs: Vec<usize>,
    pub r: f64,
    pub measure: CentralityMeasure,
    pub fc: Vec<f64>,
    hub_flags: Vec<bool>,
}

impl CentralityProfile {
    /// Build a profile from precomputed scores. Scores must be finite and
    /// at least 1.
    pub fn from_scores(c: Vec<f64>, r: f64, measure: CentralityMeasure) -> Result<Self> {
        for (i, &v) in c.iter().enumerate() {
            if !v.is_finite() || v < 1.0 {
                return Err(Error::data(format!(
                    "centrality index {v} at vertex {i} is not a finite value >= 1"
                )));
            }
        }
        let hubs = select_hubs(&c, r)?;
        let mut hub_flags = vec![false; c.len()];
        for &h in &hubs {
            hub_flags[h] = true;
        }
        let fc = c
            .iter()
            .enumerate()
            .map(|(i, &v)| if hub_flags[i] { v } else { 1.0 })
            .collect();
        Ok(CentralityProfile {
            c,
            hubs,
            r,
            measure,
            fc,
            hub_flags,
        })
    }

    /// Score the graph under `measure` (eigenvector uses default tolerance
    /// and iteration cap) and select hubs at rate `r`.
    pub fn compute(graph: &Graph, measure: CentralityMeasure, r: f64) -> Result<Self> {
        let c = match measure {
            CentralityMeasure::Degree => degree_centrality(graph),
            CentralityMeasure::Eigenvector => {
                eigenvector_centrality(graph, DEFAULT_EIGEN_TOL, DEFAULT_EIGEN_MAX_ITER)?
            }
        };
        Self::from_scores(c, r, measure)
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn is_hub(&self, i: usize) -> bool {
        self.hub_flags[i]
    }

    pub fn f_c(&self, i: usize) -> f64 {
        self.fc[i]
    }

    /// Write `vertex_id centrality is_hub` lines, preceded by measure and
    /// hub-rate headers. Values survive a read-back bit-exactly.
    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str(&format!("# measure {}\n", self.measure));
        out.push_str(&format!("# hub_rate {}\n", self.r));
        for i in 0..self.n() {
            out.push_str(&format!(
                "{} {} {}\n",
                i,
                self.c[i],
                if self.hub_flags[i] { 1 } else { 0 }
            ));
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// Read a profile written by [`write_text`](Self::write_text).
    pub fn read_text(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut measure = None;
        let mut r = None;
        let mut rows: Vec<(usize, f64, bool)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(m) = rest.strip_prefix("measure ") {
                    measure = Some(m.trim().parse::<CentralityMeasure>()?);
                } else if let Some(v) = rest.strip_prefix("hub_rate ") {
                    r = Some(v.trim().parse::<f64>().map_err(|_| {
                        Error::data(format!(
                            "{}:{}: invalid hub_rate",
                            path.display(),
                            lineno + 1
                        ))
                    })?);
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::data(format!(
                    "{}:{}: expected 'vertex_id centrality is_hub'",
                    path.display(),
                    lineno + 1
                )));
            }
            let id: usize = fields[0].parse().map_err(|_| {
                Error::data(format!("{}:{}: invalid id", path.display(), lineno + 1))
            })?;
            let score: f64 = fields[1].parse().map_err(|_| {
                Error::data(format!("{}:{}: invalid score", path.display(), lineno + 1))
            })?;
            let is_hub = match fields[2] {
                "0" => false,
                "1" => true,
                _ => {
                    return Err(Error::data(format!(
                        "{}:{}: is_hub must be 0 or 1",
                        path.display(),
                        lineno + 1
                    )))
                }
            };
            rows.push((id, score, is_hub));
        }
        let measure = measure
            .ok_or_else(|| Error::data(format!("{}: missing measure header", path.display())))?;
        let r =
            r.ok_or_else(|| Error::data(format!("{}: missing hub_rate header", path.display())))?;
        rows.sort_by_key(|&(id, _, _)| id);
        for (expect, &(id, _, _)) in rows.iter().enumerate() {
            if id != expect {
                return Err(Error::data(format!(
                    "{}: vertex ids not contiguous at {id}",
                    path.display()
                )));
            }
        }
        let c: Vec<f64> = rows.iter().map(|&(_, s, _)| s).collect();
        let profile = Self::from_scores(c, r, measure)?;
        for &(id, _, is_hub) in &rows {
            if profile.hub_flags[id] != is_hub {
                return Err(Error::data(format!(
                    "{}: stored hub flag for vertex {id} disagrees with recomputed selection",
                    path.display()
                )));
            }
        }
        Ok(profile)
    }
}

/// Degree centrality: the weighted degree, floored at 1 so isolated (or
/// weakly weighted) vertices never scale edge weights below the identity.
pub fn degree_centrality(graph: &Graph) -> Vec<f64> {
    graph.degrees().iter().map(|&d| d.max(1.0)).collect()
}

/// Eigenvector centrality via power iteration, normalized so the minimum
/// component is exactly 1.
///
/// Iterates on A + I, which has the same eigenvectors as A but a unique
/// dominant eigenvalue, so the iteration also settles on bipartite graphs
/// where iterating on A alone oscillates forever. Convergence requires both
/// a successive-iterate change below `tol` in max-norm and an eigenpair
/// residual on A below `5 * tol`, which keeps the documented residual bound
/// `|A v - lambda v| / |v| < 10 * tol` with margin.
pub fn eigenvector_centrality(graph: &Graph, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    if tol <= 0.0 || max_iter == 0 {
        return Err(Error::config(format!(
            "need tol > 0 and max_iter > 0, got tol = {tol}, max_iter = {max_iter}"
        )));
    }
    let n = graph.n();
    let mut x = vec![1.0f64; n];
    let mut y = vec![0.0f64; n];
    let mut residual = f64::INFINITY;

    let matvec = |x: &[f64], y: &mut [f64]| {
        for i in 0..n {
            let mut acc = 0.0;
            for &(j, w) in graph.neighbors(i) {
                acc += w * x[j];
            }
            y[i] = acc;
        }
    };

    for _ in 0..max_iter {
        matvec(&x, &mut y);
        for i in 0..n {
            y[i] += x[i];
        }
        let norm = y.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if norm == 0.0 {
            return Err(Error::numeric("power iteration collapsed to zero"));
        }
        let mut diff = 0.0f64;
        for i in 0..n {
            y[i] /= norm;
            diff = diff.max((y[i] - x[i]).abs());
        }
        std::mem::swap(&mut x, &mut y);
        if diff < tol {
            // Rayleigh quotient and residual with respect to A itself.
            matvec(&x, &mut y);
            let xtx: f64 = x.iter().map(|v| v * v).sum();
            let xtax: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let lambda = xtax / xtx;
            residual = x
                .iter()
                .zip(&y)
                .fold(0.0f64, |m, (&xi, &axi)| m.max((axi - lambda * xi).abs()));
            if residual < 5.0 * tol {
                let min_abs = x.iter().fold(f64::INFINITY, |m, &v| m.min(v.abs()));
                if min_abs <= ZERO_COMPONENT_TOL {
                    let vertex = x
                        .iter()
                        .enumerate()
                        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                        .map(|(i, _)| i)
                        .unwrap();
                    return Err(Error::numeric(format!(
                        "eigenvector component at vertex {vertex} is zero to working \
                         precision; the graph is likely disconnected (use degree \
                         centrality or the largest component)"
                    )));
                }
                return Ok(x.iter().map(|&v| v.abs() / min_abs).collect());
            }
        }
    }
    Err(Error::numeric(format!(
        "eigenvector power iteration did not converge within {max_iter} iterations \
         (eigenpair residual {residual:.3e})"
    )))
}

/// The `max(1, floor(n * r / 100))` vertices of highest centrality, ties
/// broken toward lower vertex ids. Returned sorted ascending by id.
pub fn select_hubs(c: &[f64], r: f64) -> Result<Vec<usize>> {
    if !(r > 0.0 && r < 100.0) {
        return Err(Error::config(format!(
            "hub rate must lie in (0, 100), got {r}"
        )));
    }
    if c.is_empty() {
        return Err(Error::data("cannot select hubs from an empty graph"));
    }
    let n = c.len();
    let count = ((n as f64 * r / 100.0).floor() as usize).max(1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        c[b].partial_cmp(&c[a])
            .expect("finite centrality")
            .then(a.cmp(&b))
    });
    let mut hubs = order[..count].to_vec();
    hubs.sort_unstable();
    Ok(hubs)
}
