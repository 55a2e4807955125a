//! Hub-label propagation over random-walk transition powers, and the
//! rank-based similarity sign assigned to every edge.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_PROPAGATION_STEPS: usize = 5;

/// Above this many entries (n times hub count) label scores switch from a
/// dense matrix to per-row sparse storage.
const DENSE_ENTRY_LIMIT: usize = 100_000_000;

/// Row-stochastic random-walk transition matrix P = D^-1 A, stored sparse.
/// Isolated vertices get an all-zero row.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    pub fn build(graph: &Graph) -> Self {
        let n = graph.n();
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let d = graph.degree(i);
            let row = if d > 0.0 {
                graph.neighbors(i).iter().map(|&(j, w)| (j, w / d)).collect()
            } else {
                Vec::new()
            };
            rows.push(row);
        }
        TransitionMatrix { n, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Transition probabilities out of `i` as `(target, probability)`,
    /// sorted by target id.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut p = Array2::zeros((self.n, self.n));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                p[[i, j]] = v;
            }
        }
        p
    }
}

#[derive(Debug, Clone)]
enum Scores {
    Dense(Array2<f64>),
    Sparse(Vec<Vec<(usize, f64)>>),
}

/// Hub-label scores L^t: row i holds the probability that a t-step random
/// walk from vertex i ends on each hub. Column order follows `hubs`.
#[derive(Debug, Clone)]
pub struct LabelMatrix {
    pub t: usize,
    pub hubs: Vec<usize>,
    n: usize,
    scores: Scores,
}

impl LabelMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hub_count(&self) -> usize {
        self.hubs.len()
    }

    pub fn score(&self, i: usize, col: usize) -> f64 {
        match &self.scores {
            Scores::Dense(m) => m[[i, col]],
            Scores::Sparse(rows) => rows[i]
                .binary_search_by_key(&col, |&(c, _)| c)
                .map(|idx| rows[i][idx].1)
                .unwrap_or(0.0),
        }
    }

    /// Row i materialized as a dense hub-count-length vector.
    pub fn row(&self, i: usize) -> Vec<f64> {
        match &self.scores {
            Scores::Dense(m) => m.row(i).to_vec(),
            Scores::Sparse(rows) => {
                let mut out = vec![0.0; self.hubs.len()];
                for &(c, v) in &rows[i] {
                    out[c] = v;
                }
                out
            }
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        match &self.scores {
            Scores::Dense(m) => m.clone(),
            Scores::Sparse(_) => {
                let mut out = Array2::zeros((self.n, self.hubs.len()));
                for i in 0..self.n {
                    for (c, v) in self.row(i).into_iter().enumerate() {
                        out[[i, c]] = v;
                    }
                }
                out
            }
        }
    }

    /// Write `vertex_id score...` lines with step and hub-order headers.
    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        writeln!(out, "# steps {}", self.t).expect("string write");
        let hub_list: Vec<String> = self.hubs.iter().map(|h| h.to_string()).collect();
        writeln!(out, "# hubs {}", hub_list.join(" ")).expect("string write");
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(out, "{} {}", i, row.join(" ")).expect("string write");
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// One step of L <- P L, shared by both storages so they accumulate in the
/// same order and agree bit-for-bit.
fn step_row(
    p_row: &[(usize, f64)],
    read_row: impl Fn(usize) -> Vec<f64>,
    scratch: &mut [f64],
) {
    scratch.fill(0.0);
    for &(j, w) in p_row {
        for (c, v) in read_row(j).into_iter().enumerate() {
            scratch[c] += w * v;
        }
    }
}

/// Propagate hub indicator labels t steps: L^t = P^t L_0 with L_0 the
/// one-hot hub indicator matrix.
pub fn propagate(p: &TransitionMatrix, hubs: &[usize], t: usize) -> Result<LabelMatrix> {
    propagate_with_limit(p, hubs, t, DENSE_ENTRY_LIMIT)
}

pub(crate) fn propagate_with_limit(
    p: &TransitionMatrix,
    hubs: &[usize],
    t: usize,
    dense_limit: usize,
) -> Result<LabelMatrix> {
    if t < 1 {
        return Err(Error::config("propagation step count must be >= 1"));
    }
    if hubs.is_empty() {
        return Err(Error::data("cannot propagate an empty hub set"));
    }
    let n = p.n();
    let h = hubs.len();
    for &hub in hubs {
        if hub >= n {
            return Err(Error::data(format!("hub vertex {hub} out of range")));
        }
    }
    let mut col_of: HashMap<usize, usize> = HashMap::with_capacity(h);
    for (c, &hub) in hubs.iter().enumerate() {
        if col_of.insert(hub, c).is_some() {
            return Err(Error::data(format!("duplicate hub vertex {hub}")));
        }
    }

    let dense = n.saturating_mul(h) <= dense_limit;
    if dense {
        let mut cur = Array2::zeros((n, h));
        for (&hub, &c) in &col_of {
            cur[[hub, c]] = 1.0;
        }
        let mut scratch = vec![0.0; h];
        for _ in 0..t {
            let mut next = Array2::zeros((n, h));
            for i in 0..n {
                step_row(p.row(i), |j| cur.row(j).to_vec(), &mut scratch);
                for c in 0..h {
                    next[[i, c]] = scratch[c];
                }
            }
            cur = next;
        }
        Ok(LabelMatrix {
            t,
            hubs: hubs.to_vec(),
            n,
            scores: Scores::Dense(cur),
        })
    } else {
        let mut cur: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&hub, &c) in &col_of {
            cur[hub] = vec![(c, 1.0)];
        }
        let mut scratch = vec![0.0; h];
        for _ in 0..t {
            let mut next: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
            for i in 0..n {
                step_row(
                    p.row(i),
                    |j| {
                        let mut row = vec![0.0; h];
                        for &(c, v) in &cur[j] {
                            row[c] = v;
                        }
                        row
                    },
                    &mut scratch,
                );
                next.push(
                    scratch
                        .iter()
                        .enumerate()
                        .filter(|&(_, &v)| v != 0.0)
                        .map(|(c, &v)| (c, v))
                        .collect(),
                );
            }
            cur = next;
        }
        Ok(LabelMatrix {
            t,
            hubs: hubs.to_vec(),
            n,
            scores: Scores::Sparse(cur),
        })
    }
}

/// Symmetric per-edge sign in {+1, -1}; -1 marks hub edges whose endpoint
/// ranks the hub below its own hub-neighbor count.
#[derive(Debug, Clone)]
pub struct SimilaritySign {
    edges: Vec<(usize, usize)>,
    signs: Vec<i8>,
    lookup: HashMap<(usize, usize), i8>,
}

impl SimilaritySign {
    /// Sign for edge (i, j) in either orientation; None when the pair is
    /// not an edge.
    pub fn sign(&self, i: usize, j: usize) -> Option<i8> {
        self.lookup.get(&(i.min(j), i.max(j))).copied()
    }

    /// Edge-aligned iteration in canonical (i < j) order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        self.edges
            .iter()
            .zip(&self.signs)
            .map(|(&(i, j), &s)| (i, j, s))
    }

    pub fn negative_count(&self) -> usize {
        self.signs.iter().filter(|&&s| s < 0).count()
    }

    /// Write `i j sign` per edge.
    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (i, j, s) in self.iter() {
            writeln!(out, "{i} {j} {s}").expect("string write");
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// 1-based rank of each hub column in row i of the label matrix, sorting
/// scores descending with ties going to the lower column index.
fn ranks_for_row(row: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        row[b]
            .partial_cmp(&row[a])
            .expect("finite label score")
            .then(a.cmp(&b))
    });
    let mut rank = vec![0; row.len()];
    for (pos, &col) in order.iter().enumerate() {
        rank[col] = pos + 1;
    }
    rank
}

/// Evaluate the similarity sign on every edge: f_S(i,j) is the minimum of
/// the two directed assessments, where vertex i accepts hub j only if j's
/// label score ranks within i's hub-neighbor count.
pub fn similarity_sign(
    graph: &Graph,
    labels: &LabelMatrix,
    hubs: &[usize],
) -> Result<SimilaritySign> {
    if labels.n() != graph.n() {
        return Err(Error::data(format!(
            "label matrix has {} rows but graph has {} vertices",
            labels.n(),
            graph.n()
        )));
    }
    if labels.hubs != hubs {
        return Err(Error::data(
            "hub set disagrees with the label matrix columns",
        ));
    }
    let n = graph.n();
    let mut col_of: HashMap<usize, usize> = HashMap::with_capacity(hubs.len());
    for (c, &hub) in hubs.iter().enumerate() {
        col_of.insert(hub, c);
    }
    let hub_neighbor_count: Vec<usize> = (0..n)
        .map(|i| {
            graph
                .neighbors(i)
                .iter()
                .filter(|&&(j, _)| col_of.contains_key(&j))
                .count()
        })
        .collect();
    // Ranks are only consulted for vertices with a hub neighbor.
    let mut ranks: Vec<Option<Vec<usize>>> = vec![None; n];
    for i in 0..n {
        if hub_neighbor_count[i] > 0 {
            ranks[i] = Some(ranks_for_row(&labels.row(i)));
        }
    }

    let directed = |i: usize, j: usize| -> i8 {
        match col_of.get(&j) {
            None => 1,
            Some(&col) => {
                let rank = ranks[i].as_ref().expect("hub neighbor has ranks")[col];
                if rank <= hub_neighbor_count[i] {
                    1
                } else {
                    -1
                }
            }
        }
    };

    let mut edges = Vec::with_capacity(graph.edge_count());
    let mut signs = Vec::with_capacity(graph.edge_count());
    let mut lookup = HashMap::with_capacity(graph.edge_count());
    for &(i, j, _) in graph.edges() {
        let s = directed(i, j).min(directed(j, i));
        edges.push((i, j));
        signs.push(s);
        lookup.insert((i, j), s);
    }
    Ok(SimilaritySign {
        edges,
        signs,
        lookup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_scale_free;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn star() -> Graph {
        Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap()
    }

    /// Exact matrix-power oracle: P^t applied to the one-hot hub indicator.
    fn power_oracle(graph: &Graph, hubs: &[usize], t: usize) -> Array2<f64> {
        let p = TransitionMatrix::build(graph).to_dense();
        let mut l = Array2::zeros((graph.n(), hubs.len()));
        for (c, &h) in hubs.iter().enumerate() {
            l[[h, c]] = 1.0;
        }
        for _ in 0..t {
            l = p.dot(&l);
        }
        l
    }

    /// Monte-Carlo oracle: empirical landing frequency of t-step walks.
    fn walk_oracle(graph: &Graph, hubs: &[usize], t: usize, walks_per_vertex: usize) -> Array2<f64> {
        let n = graph.n();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut counts = Array2::zeros((n, hubs.len()));
        for start in 0..n {
            for _ in 0..walks_per_vertex {
                let mut v = start;
                let mut alive = true;
                for _ in 0..t {
                    let nbrs = graph.neighbors(v);
                    if nbrs.is_empty() {
                        alive = false;
                        break;
                    }
                    v = nbrs[rng.random_range(0..nbrs.len())].0;
                }
                if alive {
                    if let Some(c) = hubs.iter().position(|&h| h == v) {
                        counts[[start, c]] += 1.0;
                    }
                }
            }
        }
        counts / walks_per_vertex as f64
    }

    #[test]
    fn transition_rows_are_uniform_over_neighbors() {
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let p = TransitionMatrix::build(&path);
        assert_eq!(p.row(1), &[(0, 0.5), (2, 0.5)]);

        let p = TransitionMatrix::build(&star());
        assert_eq!(p.row(1), &[(0, 1.0)]);
        assert_eq!(p.row(0), &[(1, 0.25), (2, 0.25), (3, 0.25), (4, 0.25)]);
    }

    #[test]
    fn transition_isolated_vertex_row_is_empty() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let p = TransitionMatrix::build(&g);
        assert!(p.row(2).is_empty());
        assert_eq!(p.to_dense().row(2).sum(), 0.0);
    }

    #[test]
    fn star_propagation_alternates_exactly() {
        // Odd steps drop all leaf mass on the hub; even steps return it.
        // At t=5 each leaf sits on the hub with probability exactly 1.
        let g = star();
        let p = TransitionMatrix::build(&g);
        let l = propagate(&p, &[0], 5).unwrap();
        assert_eq!(l.row(0), vec![0.0]);
        for i in 1..5 {
            assert_eq!(l.row(i), vec![1.0]);
        }
    }

    #[test]
    fn single_step_is_normalized_adjacency_column() {
        let g = generate_scale_free(9, 2, 31).unwrap();
        let p = TransitionMatrix::build(&g);
        let hub = 0usize;
        let l = propagate(&p, &[hub], 1).unwrap();
        for i in 0..9 {
            let expect = g.weight(i, hub).unwrap_or(0.0) / g.degree(i);
            assert_eq!(l.score(i, 0), expect);
        }
    }

    #[test]
    fn propagation_matches_matrix_power_oracle() {
        for seed in [5u64, 6, 7] {
            let g = generate_scale_free(11, 2, seed).unwrap();
            let hubs = vec![0, 3];
            let p = TransitionMatrix::build(&g);
            let l = propagate(&p, &hubs, 5).unwrap();
            let oracle = power_oracle(&g, &hubs, 5);
            for i in 0..11 {
                for c in 0..2 {
                    assert_abs_diff_eq!(l.score(i, c), oracle[[i, c]], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn propagation_matches_monte_carlo_oracle() {
        let g = generate_scale_free(8, 2, 12).unwrap();
        let hubs = vec![1, 4];
        let p = TransitionMatrix::build(&g);
        let l = propagate(&p, &hubs, 5).unwrap();
        let mc = walk_oracle(&g, &hubs, 5, 125_000);
        for i in 0..8 {
            for c in 0..2 {
                assert_abs_diff_eq!(l.score(i, c), mc[[i, c]], epsilon = 0.01);
            }
        }
    }

    #[test]
    fn dense_and_sparse_storage_agree_bitwise() {
        let g = generate_scale_free(30, 3, 44).unwrap();
        let hubs = vec![0, 4, 9, 17];
        let p = TransitionMatrix::build(&g);
        let dense = propagate_with_limit(&p, &hubs, 5, usize::MAX).unwrap();
        let sparse = propagate_with_limit(&p, &hubs, 5, 0).unwrap();
        for i in 0..30 {
            for c in 0..4 {
                assert_eq!(dense.score(i, c).to_bits(), sparse.score(i, c).to_bits());
            }
        }
    }

    #[test]
    fn row_mass_equals_hub_columns_of_matrix_power() {
        let g = generate_scale_free(12, 2, 77).unwrap();
        let hubs = vec![2, 6, 10];
        let p = TransitionMatrix::build(&g);
        let l = propagate(&p, &hubs, 5).unwrap();
        let mut pt = Array2::<f64>::eye(12);
        let pd = p.to_dense();
        for _ in 0..5 {
            pt = pt.dot(&pd);
        }
        for i in 0..12 {
            let mass: f64 = l.row(i).iter().sum();
            let expect: f64 = hubs.iter().map(|&h| pt[[i, h]]).sum();
            assert_abs_diff_eq!(mass, expect, epsilon = 1e-12);
            assert!(mass <= 1.0 + 1e-12);
            for v in l.row(i) {
                assert!((0.0..=1.0 + 1e-12).contains(&v));
            }
        }
    }

    #[test]
    fn star_signs_are_all_positive() {
        let g = star();
        let p = TransitionMatrix::build(&g);
        let hubs = vec![0];
        let l = propagate(&p, &hubs, 5).unwrap();
        let s = similarity_sign(&g, &l, &hubs).unwrap();
        for (_, _, sign) in s.iter() {
            assert_eq!(sign, 1);
        }
        assert_eq!(s.sign(0, 3), Some(1));
        assert_eq!(s.sign(1, 2), None);
    }

    #[test]
    fn non_hub_edges_are_always_positive() {
        let g = generate_scale_free(20, 2, 3).unwrap();
        let hubs = vec![0];
        let p = TransitionMatrix::build(&g);
        let l = propagate(&p, &hubs, 5).unwrap();
        let s = similarity_sign(&g, &l, &hubs).unwrap();
        for (i, j, sign) in s.iter() {
            if i != 0 && j != 0 {
                assert_eq!(sign, 1);
            }
        }
    }

    #[test]
    fn peripheral_hub_attachment_goes_negative() {
        // Vertex 3 touches hubs 0 and 1, but its community mass lands on
        // hubs 0 and 2, ranking hub 1 third against two hub neighbors.
        let g = Graph::from_edges(
            7,
            &[
                (0, 3),
                (1, 3),
                (0, 4),
                (0, 5),
                (0, 6),
                (2, 4),
                (2, 5),
                (2, 6),
                (3, 4),
                (3, 5),
                (3, 6),
            ],
        )
        .unwrap();
        let hubs = vec![0, 1, 2];
        let p = TransitionMatrix::build(&g);
        let l = propagate(&p, &hubs, 5).unwrap();

        let oracle = power_oracle(&g, &hubs, 5);
        assert!(oracle[[3, 0]] > oracle[[3, 1]], "rank precondition");
        assert!(oracle[[3, 2]] > oracle[[3, 1]], "rank precondition");

        let s = similarity_sign(&g, &l, &hubs).unwrap();
        assert_eq!(s.sign(3, 1), Some(-1));
        assert_eq!(s.sign(3, 0), Some(1));
    }

    #[test]
    fn rank_ties_prefer_lower_column() {
        assert_eq!(ranks_for_row(&[0.3, 0.5, 0.3]), vec![2, 1, 3]);
        assert_eq!(ranks_for_row(&[0.0, 0.0]), vec![1, 2]);
    }

    #[test]
    fn label_matrix_dump_lists_rows() {
        let g = star();
        let p = TransitionMatrix::build(&g);
        let l = propagate(&p, &[0], 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.txt");
        l.write_text(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("# steps 5"));
        assert!(text.contains("# hubs 0"));
        assert!(text.contains("1 1\n"));
    }

    proptest! {
        #[test]
        fn signs_are_symmetric_and_deterministic(seed in 0u64..150) {
            let g = generate_scale_free(16, 2, seed).unwrap();
            let hubs = vec![0, 1];
            let p = TransitionMatrix::build(&g);
            let l1 = propagate(&p, &hubs, 5).unwrap();
            let l2 = propagate(&p, &hubs, 5).unwrap();
            for i in 0..16 {
                for c in 0..2 {
                    prop_assert_eq!(l1.score(i, c).to_bits(), l2.score(i, c).to_bits());
                }
            }
            let s = similarity_sign(&g, &l1, &hubs).unwrap();
            for (i, j, sign) in s.iter() {
                prop_assert_eq!(s.sign(j, i), Some(sign));
                if sign < 0 {
                    prop_assert!(hubs.contains(&i) || hubs.contains(&j));
                }
            }
        }
    }
}
