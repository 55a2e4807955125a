//! Downstream metrics: classification accuracy, link-prediction AUC with
//! Hadamard edge features and logistic regression, k-means clustering with
//! NMI, and embedding export.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Column of the largest value in a row, ties going to the lowest index.
pub fn argmax_row(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Fraction of `index_set` rows whose argmax matches the label.
pub fn accuracy(scores: &Array2<f64>, labels: &[usize], index_set: &[usize]) -> Result<f64> {
    if index_set.is_empty() {
        return Err(Error::data("accuracy over an empty index set"));
    }
    let mut correct = 0usize;
    for &i in index_set {
        if i >= scores.nrows() || i >= labels.len() {
            return Err(Error::data(format!("index {i} out of range for accuracy")));
        }
        let row = scores.row(i);
        if argmax_row(row.as_slice().expect("contiguous row")) == labels[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / index_set.len() as f64)
}

/// One row per pair: the elementwise product of the two endpoint embeddings.
pub fn hadamard_edge_features(z: &Array2<f64>, pairs: &[(usize, usize)]) -> Result<Array2<f64>> {
    let d = z.ncols();
    let mut out = Array2::zeros((pairs.len(), d));
    for (row, &(i, j)) in pairs.iter().enumerate() {
        if i >= z.nrows() || j >= z.nrows() {
            return Err(Error::data(format!("pair ({i}, {j}) out of embedding range")));
        }
        for c in 0..d {
            out[[row, c]] = z[[i, c]] * z[[j, c]];
        }
    }
    Ok(out)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Binary logistic-regression classifier trained by full-batch gradient
/// descent from a zero initialization, with L2 penalty on the weights.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    pub w: Array1<f64>,
    pub b: f64,
    pub l2: f64,
}

pub const LOGISTIC_L2: f64 = 1e-4;

impl LogisticRegression {
    /// Train on rows of `x` against 0/1 labels. Zero iterations leave the
    /// zero classifier, which scores everything 0.5.
    pub fn fit(x: &Array2<f64>, labels: &[usize], lr: f64, iters: usize) -> Result<Self> {
        if x.nrows() != labels.len() {
            return Err(Error::data(format!(
                "{} feature rows but {} labels",
                x.nrows(),
                labels.len()
            )));
        }
        let pos = labels.iter().filter(|&&y| y == 1).count();
        if pos == 0 || pos == labels.len() {
            return Err(Error::data(
                "logistic regression needs at least one example of each class",
            ));
        }
        if labels.iter().any(|&y| y > 1) {
            return Err(Error::data("labels must be 0 or 1"));
        }
        let mut model = LogisticRegression {
            w: Array1::zeros(x.ncols()),
            b: 0.0,
            l2: LOGISTIC_L2,
        };
        for _ in 0..iters {
            let (gw, gb) = model.gradient(x, labels);
            model.w.scaled_add(-lr, &gw);
            model.b -= lr * gb;
        }
        Ok(model)
    }

    /// Mean cross-entropy plus the L2 penalty; the quantity `fit` descends.
    pub fn loss(&self, x: &Array2<f64>, labels: &[usize]) -> f64 {
        let m = x.nrows() as f64;
        let mut total = 0.0;
        for (row, &y) in x.rows().into_iter().zip(labels) {
            let p = sigmoid(row.dot(&self.w) + self.b);
            let p = p.clamp(1e-12, 1.0 - 1e-12);
            total -= if y == 1 { p.ln() } else { (1.0 - p).ln() };
        }
        total / m + self.l2 * self.w.dot(&self.w)
    }

    fn gradient(&self, x: &Array2<f64>, labels: &[usize]) -> (Array1<f64>, f64) {
        let m = x.nrows() as f64;
        let mut gw = Array1::zeros(x.ncols());
        let mut gb = 0.0;
        for (row, &y) in x.rows().into_iter().zip(labels) {
            let p = sigmoid(row.dot(&self.w) + self.b);
            let err = p - y as f64;
            gw.scaled_add(err, &row);
            gb += err;
        }
        gw /= m;
        gb /= m;
        gw.scaled_add(2.0 * self.l2, &self.w);
        (gw, gb)
    }

    pub fn predict(&self, x: &Array2<f64>) -> Vec<f64> {
        x.rows()
            .into_iter()
            .map(|row| sigmoid(row.dot(&self.w) + self.b))
            .collect()
    }
}

/// Mann-Whitney AUC: the probability that a random positive outscores a
/// random negative, ties counting one half.
pub fn auc(scores: &[f64], labels: &[usize]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::data(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::data("AUC needs both classes present"));
    }
    // Average ranks over tied scores, then apply the rank-sum formula.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));
    let mut rank = vec![0.0f64; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            rank[idx] = avg;
        }
        i = j + 1;
    }
    let rank_sum_pos: f64 = labels
        .iter()
        .enumerate()
        .filter(|&(_, &y)| y == 1)
        .map(|(i, _)| rank[i])
        .sum();
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// K-means outcome: per-point cluster ids, final within-cluster sum of
/// squares, and the inertia recorded after every Lloyd iteration of the
/// winning restart.
#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub assignment: Vec<usize>,
    pub inertia: f64,
    pub inertia_trace: Vec<f64>,
}

pub const KMEANS_RESTARTS: usize = 10;
pub const KMEANS_MAX_ITERS: usize = 300;

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn kmeans_once(points: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> KMeansResult {
    let n = points.nrows();
    let d = points.ncols();
    let row = |i: usize| points.row(i).to_slice().expect("contiguous row");

    // k-means++ seeding: first center uniform, the rest proportional to
    // squared distance from the nearest chosen center.
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(row(rng.random_range(0..n)).to_vec());
    let mut dist2: Vec<f64> = (0..n)
        .map(|i| squared_distance(row(i), &centers[0]))
        .collect();
    while centers.len() < k {
        let total: f64 = dist2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in dist2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.push(row(next).to_vec());
        for i in 0..n {
            dist2[i] = dist2[i].min(squared_distance(row(i), centers.last().unwrap()));
        }
    }

    let mut assignment = vec![0usize; n];
    let mut trace = Vec::new();
    for _ in 0..KMEANS_MAX_ITERS {
        let mut changed = false;
        let mut inertia = 0.0;
        for i in 0..n {
            let mut best = 0;
            let mut best_d = squared_distance(row(i), &centers[0]);
            for (c, center) in centers.iter().enumerate().skip(1) {
                let dd = squared_distance(row(i), center);
                if dd < best_d {
                    best_d = dd;
                    best = c;
                }
            }
            inertia += best_d;
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        trace.push(inertia);
        if !changed && trace.len() > 1 {
            break;
        }
        let mut counts = vec![0usize; k];
        let mut sums = vec![vec![0.0f64; d]; k];
        for i in 0..n {
            counts[assignment[i]] += 1;
            for c in 0..d {
                sums[assignment[i]][c] += points[[i, c]];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..d {
                    centers[c][j] = sums[c][j] / counts[c] as f64;
                }
            } else {
                // Reseed an empty cluster on the point farthest from its
                // current center.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        squared_distance(row(a), &centers[assignment[a]])
                            .partial_cmp(&squared_distance(row(b), &centers[assignment[b]]))
                            .unwrap()
                    })
                    .unwrap();
                centers[c] = row(far).to_vec();
            }
        }
    }
    let inertia = *trace.last().expect("at least one iteration");
    KMeansResult {
        assignment,
        inertia,
        inertia_trace: trace,
    }
}

/// Lloyd's algorithm with k-means++ seeding; the best of `restarts`
/// independent runs by inertia, deterministic given `seed`.
pub fn kmeans(points: &Array2<f64>, k: usize, seed: u64, restarts: usize) -> Result<KMeansResult> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::config(format!(
            "k must lie in 1..={n} (points), got {k}"
        )));
    }
    if restarts == 0 {
        return Err(Error::config("k-means needs at least one restart"));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(master.random());
        let run = kmeans_once(points, k, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information between two partitions, normalized by the
/// geometric mean of their entropies (natural logs). Zero when either
/// partition is a single block.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::data(format!(
            "partition lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::data("NMI of empty partitions"));
    }
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let n = a.len() as f64;
    let mut joint = vec![vec![0usize; kb]; ka];
    let mut ca = vec![0usize; ka];
    let mut cb = vec![0usize; kb];
    for (&u, &v) in a.iter().zip(b) {
        joint[u][v] += 1;
        ca[u] += 1;
        cb[v] += 1;
    }
    let ha = entropy(&ca, n);
    let hb = entropy(&cb, n);
    if ha == 0.0 || hb == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for u in 0..ka {
        for v in 0..kb {
            let nij = joint[u][v];
            if nij > 0 {
                let pij = nij as f64 / n;
                mi += pij * (n * nij as f64 / (ca[u] as f64 * cb[v] as f64)).ln();
            }
        }
    }
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

/// Write embeddings as a `# n <rows> d <cols>` header followed by one
/// `vertex_id coordinate...` line per vertex, full double precision.
pub fn export_embeddings(z: &Array2<f64>, path: &Path) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# n {} d {}", z.nrows(), z.ncols()).expect("string write");
    for i in 0..z.nrows() {
        let coords: Vec<String> = z.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{} {}", i, coords.join(" ")).expect("string write");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a file written by [`export_embeddings`].
pub fn load_embeddings(path: &Path) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::data(format!("{}: empty embeddings file", path.display())))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (n, d) = match fields.as_slice() {
        ["#", "n", n, "d", d] => {
            let n: usize = n
                .parse()
                .map_err(|_| Error::data(format!("{}: bad header", path.display())))?;
            let d: usize = d
                .parse()
                .map_err(|_| Error::data(format!("{}: bad header", path.display())))?;
            (n, d)
        }
        _ => return Err(Error::data(format!("{}: missing header", path.display()))),
    };
    let mut z = Array2::zeros((n, d));
    let mut seen = 0usize;
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != d + 1 {
            return Err(Error::data(format!(
                "{}:{}: expected {} fields",
                path.display(),
                lineno + 2,
                d + 1
            )));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| Error::data(format!("{}:{}: bad id", path.display(), lineno + 2)))?;
        if id >= n {
            return Err(Error::data(format!(
                "{}:{}: id {} out of range",
                path.display(),
                lineno + 2,
                id
            )));
        }
        for (c, tok) in fields[1..].iter().enumerate() {
            z[[id, c]] = tok.parse().map_err(|_| {
                Error::data(format!("{}:{}: bad value", path.display(), lineno + 2))
            })?;
        }
        seen += 1;
    }
    if seen != n {
        return Err(Error::data(format!(
            "{}: header promises {} rows, found {}",
            path.display(),
            n,
            seen
        )));
    }
    Ok(z)
}

/// Evaluation task the report belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalTask {
    Classification,
    LinkPrediction,
    Clustering,
}

impl fmt::Display for EvalTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalTask::Classification => write!(f, "classification"),
            EvalTask::LinkPrediction => write!(f, "link_prediction"),
            EvalTask::Clustering => write!(f, "clustering"),
        }
    }
}

impl std::str::FromStr for EvalTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classification" => Ok(EvalTask::Classification),
            "link_prediction" => Ok(EvalTask::LinkPrediction),
            "clustering" => Ok(EvalTask::Clustering),
            other => Err(Error::config(format!(
                "unknown task '{other}' (expected classification, link_prediction, or clustering)"
            ))),
        }
    }
}

/// A single metric outcome plus everything needed to reproduce it.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub task: EvalTask,
    pub metric_name: String,
    pub metric_value: f64,
    pub seed: u64,
    pub config_echo: Vec<(String, String)>,
}

impl EvalReport {
    pub fn new(
        task: EvalTask,
        metric_name: &str,
        metric_value: f64,
        seed: u64,
        config_echo: Vec<(String, String)>,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&metric_value) {
            return Err(Error::numeric(format!(
                "{metric_name} = {metric_value} outside [0, 1]"
            )));
        }
        Ok(EvalReport {
            task,
            metric_name: metric_name.to_string(),
            metric_value,
            seed,
            config_echo,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("task,metric,value,seed\n");
        writeln!(
            out,
            "{},{},{},{}",
            self.task, self.metric_name, self.metric_value, self.seed
        )
        .expect("string write");
        out
    }

    pub fn pretty(&self) -> String {
        let mut out = String::new();
        writeln!(out, "task:   {}", self.task).expect("string write");
        writeln!(out, "{}: {}", self.metric_name, self.metric_value).expect("string write");
        writeln!(out, "seed:   {}", self.seed).expect("string write");
        for (k, v) in &self.config_echo {
            writeln!(out, "  {k} = {v}").expect("string write");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn accuracy_trivia() {
        let z = array![[0.9, 0.1], [0.2, 0.8], [0.6, 0.4]];
        let labels = vec![0, 1, 0];
        let all: Vec<usize> = (0..3).collect();
        assert_eq!(accuracy(&z, &labels, &all).unwrap(), 1.0);

        let wrong = vec![1, 0, 1];
        assert_eq!(accuracy(&z, &wrong, &all).unwrap(), 0.0);

        let half = vec![0, 0, 1];
        assert_abs_diff_eq!(accuracy(&z, &half, &all).unwrap(), 1.0 / 3.0);
        assert!(accuracy(&z, &labels, &[]).is_err());
    }

    #[test]
    fn accuracy_argmax_ties_take_lowest_class() {
        let z = array![[0.5, 0.5]];
        assert_eq!(accuracy(&z, &[0], &[0]).unwrap(), 1.0);
        assert_eq!(accuracy(&z, &[1], &[0]).unwrap(), 0.0);
    }

    #[test]
    fn hadamard_features_cases() {
        let z = array![[1.0, 1.0], [0.0, 0.0], [2.0, -3.0]];
        let f = hadamard_edge_features(&z, &[(0, 0), (1, 2), (0, 2)]).unwrap();
        assert_eq!(f.row(0).to_vec(), vec![1.0, 1.0]);
        assert_eq!(f.row(1).to_vec(), vec![0.0, 0.0]);
        assert_eq!(f.row(2).to_vec(), vec![2.0, -3.0]);
    }

    #[test]
    fn logistic_zero_iterations_scores_half() {
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        let m = LogisticRegression::fit(&x, &[0, 1], 0.1, 0).unwrap();
        assert_eq!(m.predict(&x), vec![0.5, 0.5]);
    }

    #[test]
    fn logistic_separable_toy_reaches_full_accuracy() {
        let x = array![
            [2.0, 0.1],
            [1.5, -0.2],
            [1.8, 0.0],
            [-2.0, 0.1],
            [-1.4, -0.3],
            [-1.9, 0.2]
        ];
        let y = vec![1, 1, 1, 0, 0, 0];
        let m = LogisticRegression::fit(&x, &y, 0.5, 500).unwrap();
        let scores = m.predict(&x);
        for (s, &label) in scores.iter().zip(&y) {
            assert_eq!((*s > 0.5) as usize, label);
        }
    }

    #[test]
    fn logistic_rejects_single_class() {
        let x = array![[1.0], [2.0]];
        assert!(LogisticRegression::fit(&x, &[1, 1], 0.1, 10).is_err());
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let x = array![
            [0.3, -1.2],
            [1.1, 0.4],
            [-0.5, 0.9],
            [0.0, -0.7],
            [0.8, 0.2]
        ];
        let y = vec![1, 0, 1, 0, 1];
        let mut m = LogisticRegression {
            w: array![0.3, -0.2],
            b: 0.1,
            l2: LOGISTIC_L2,
        };
        let (gw, gb) = m.gradient(&x, &y);
        let h = 1e-6;
        for j in 0..2 {
            let orig = m.w[j];
            m.w[j] = orig + h;
            let up = m.loss(&x, &y);
            m.w[j] = orig - h;
            let down = m.loss(&x, &y);
            m.w[j] = orig;
            assert_abs_diff_eq!(gw[j], (up - down) / (2.0 * h), epsilon = 1e-6);
        }
        let up = LogisticRegression { b: m.b + h, ..m.clone() }.loss(&x, &y);
        let down = LogisticRegression { b: m.b - h, ..m.clone() }.loss(&x, &y);
        assert_abs_diff_eq!(gb, (up - down) / (2.0 * h), epsilon = 1e-6);
    }

    #[test]
    fn auc_trivia() {
        assert_eq!(auc(&[0.9, 0.8, 0.1, 0.2], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(auc(&[0.4, 0.4, 0.4], &[1, 0, 1]).unwrap(), 0.5);
        // One winning pair, one losing pair.
        assert_eq!(auc(&[0.9, 0.8, 0.3], &[1, 0, 1]).unwrap(), 0.5);
        assert!(auc(&[0.9, 0.8], &[1, 1]).is_err());
    }

    #[test]
    fn kmeans_separates_two_clouds() {
        let mut pts = Vec::new();
        for i in 0..20 {
            pts.push([10.0 + (i % 5) as f64 * 0.01, 10.0]);
        }
        for i in 0..20 {
            pts.push([-10.0 - (i % 5) as f64 * 0.01, -10.0]);
        }
        let flat: Vec<f64> = pts.iter().flatten().copied().collect();
        let z = Array2::from_shape_vec((40, 2), flat).unwrap();
        let result = kmeans(&z, 2, 7, KMEANS_RESTARTS).unwrap();
        let first = result.assignment[0];
        for i in 0..20 {
            assert_eq!(result.assignment[i], first);
        }
        for i in 20..40 {
            assert_ne!(result.assignment[i], first);
        }
    }

    #[test]
    fn kmeans_k_equals_n_gives_zero_inertia() {
        let z = array![[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]];
        let result = kmeans(&z, 3, 11, KMEANS_RESTARTS).unwrap();
        assert_eq!(result.inertia, 0.0);
        let mut ids = result.assignment.clone();
        ids.sort_unstable();
        assert_eq!(ids, vec![0, 1, 2]);
    }

    #[test]
    fn kmeans_inertia_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = Array2::from_shape_fn((60, 4), |_| rng.random::<f64>());
        let result = kmeans(&z, 4, 3, KMEANS_RESTARTS).unwrap();
        for pair in result.inertia_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "inertia rose: {pair:?}");
        }
    }

    #[test]
    fn kmeans_rejects_oversized_k() {
        let z = array![[0.0], [1.0]];
        assert!(kmeans(&z, 3, 1, 2).is_err());
    }

    #[test]
    fn kmeans_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let z = Array2::from_shape_fn((30, 3), |_| rng.random::<f64>());
        let a = kmeans(&z, 3, 21, KMEANS_RESTARTS).unwrap();
        let b = kmeans(&z, 3, 21, KMEANS_RESTARTS).unwrap();
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.inertia.to_bits(), b.inertia.to_bits());
    }

    #[test]
    fn nmi_trivia() {
        let a = vec![0, 0, 1, 1, 2, 2];
        assert_eq!(nmi(&a, &a).unwrap(), 1.0);
        // Permuted ids are the same partition.
        let permuted = vec![2, 2, 0, 0, 1, 1];
        assert_eq!(nmi(&a, &permuted).unwrap(), 1.0);
        // A single block has zero entropy.
        assert_eq!(nmi(&a, &[0, 0, 0, 0, 0, 0]).unwrap(), 0.0);
        assert!(nmi(&a, &[0, 1]).is_err());
    }

    #[test]
    fn nmi_independent_partitions_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 20_000;
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let v = nmi(&a, &b).unwrap();
        assert!(v < 0.05, "independent partitions gave NMI {v}");
    }

    #[test]
    fn embeddings_round_trip() {
        let z = array![[1.5, -2.25], [0.1, 1e-17]];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("embed.txt");
        export_embeddings(&z, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# n 2 d 2\n"));
        assert_eq!(text.lines().count(), 3);
        let back = load_embeddings(&path).unwrap();
        assert_eq!(z, back);
    }

    #[test]
    fn report_serializes_and_validates() {
        let report = EvalReport::new(
            EvalTask::Clustering,
            "nmi",
            0.75,
            42,
            vec![("k".into(), "4".into())],
        )
        .unwrap();
        let csv = report.to_csv();
        assert!(csv.contains("clustering,nmi,0.75,42"));
        assert!(report.pretty().contains("k = 4"));
        assert!(EvalReport::new(EvalTask::Clustering, "nmi", 1.5, 0, vec![]).is_err());
    }

    proptest! {
        #[test]
        fn auc_invariant_under_monotone_transform(
            raw in proptest::collection::vec(0.0f64..1.0, 6..40),
        ) {
            let labels: Vec<usize> = raw.iter().enumerate().map(|(i, _)| i % 2).collect();
            let scores: Vec<f64> = raw.clone();
            let transformed: Vec<f64> = raw.iter().map(|&s| (3.0 * s + 1.0).exp()).collect();
            let a = auc(&scores, &labels).unwrap();
            let b = auc(&transformed, &labels).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn nmi_is_symmetric(
            a in proptest::collection::vec(0usize..3, 30),
            b in proptest::collection::vec(0usize..4, 30),
        ) {
            let x = nmi(&a, &b).unwrap();
            let y = nmi(&b, &a).unwrap();
            prop_assert!((x - y).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&x));
        }
    }
}
