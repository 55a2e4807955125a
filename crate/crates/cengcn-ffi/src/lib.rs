//! C ABI over the cengcn pipeline.
//!
//! Handles are opaque pointers created and released by this library; every
//! `cen_*_free` accepts null. Functions return a status code: `CEN_OK` on
//! success, `CEN_EINVAL` for caller mistakes visible at the boundary (null
//! pointers, non-UTF-8 strings, undersized buffers, unknown enum codes),
//! and otherwise the same buckets the CLI uses for exit codes: 2
//! configuration, 3 data, 4 numeric, 5 I/O. After any non-zero return,
//! `cen_last_error` yields a thread-local message that stays valid until
//! the next failure on the same thread.
//!
//! Handles are not synchronized; callers must not share one handle across
//! threads without external locking.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::path::Path;

use cengcn::centrality::{CentralityMeasure, CentralityProfile};
use cengcn::config::RunConfig;
use cengcn::error::Error;
use cengcn::eval::{auc, export_embeddings, nmi};
use cengcn::graph::{estimate_power_law_alpha, generate_scale_free, load_edge_list, Graph};
use cengcn::labelprop::{propagate, similarity_sign, TransitionMatrix};
use cengcn::pipeline::train_outputs;
use cengcn::transform::{transform_graph, Ablation, TransformedAdjacency};
use ndarray::Array2;

/// Success.
pub const CEN_OK: c_int = 0;
/// Invalid argument at the C boundary: null pointer, non-UTF-8 string,
/// undersized buffer, or unknown enum code.
pub const CEN_EINVAL: c_int = 1;
/// Invalid parameter or contradictory configuration.
pub const CEN_ECONFIG: c_int = 2;
/// Malformed or inconsistent input data.
pub const CEN_EDATA: c_int = 3;
/// Numerical failure (divergence, non-convergence, NaN).
pub const CEN_ENUMERIC: c_int = 4;
/// Filesystem failure.
pub const CEN_EIO: c_int = 5;

/// Degree centrality selector for `cen_transform`.
pub const CEN_MEASURE_DEGREE: c_int = 0;
/// Eigenvector centrality selector for `cen_transform`.
pub const CEN_MEASURE_EIGENVECTOR: c_int = 1;

/// Transform with propagated similarity signs deciding each branch.
pub const CEN_ABLATION_FULL: c_int = 0;
/// Transform forcing the weight-increase branch on every edge.
pub const CEN_ABLATION_INCREASE_ONLY: c_int = 1;
/// Transform forcing the weight-decrease branch on every edge.
pub const CEN_ABLATION_DECREASE_ONLY: c_int = 2;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(code: c_int, msg: &str) -> c_int {
    let owned = CString::new(msg.replace('\0', " ")).expect("nul bytes replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
    code
}

fn fail_error(e: &Error) -> c_int {
    fail(e.exit_code(), &e.to_string())
}

/// An undirected graph behind the C boundary.
pub struct CenGraph {
    inner: Graph,
}

/// A transformed adjacency: per-vertex diagonal plus reweighted edges.
pub struct CenTransformed {
    inner: TransformedAdjacency,
}

/// A trained run: final-layer vertex representations and the task metric.
pub struct CenModel {
    outputs: Array2<f64>,
    metric: f64,
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, c_int> {
    if ptr.is_null() {
        return Err(fail(CEN_EINVAL, &format!("{what} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(CEN_EINVAL, &format!("{what} is not valid UTF-8")))
}

unsafe fn write_handle<T>(out: *mut *mut T, what: &str, value: T) -> c_int {
    if out.is_null() {
        return fail(CEN_EINVAL, &format!("{what} output pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    CEN_OK
}

/// Message for the most recent failure on this thread, or an empty string
/// if none has occurred. The pointer stays valid until the next failing
/// call on the same thread.
///
/// # Safety
/// The returned pointer must not be freed or written through.
#[no_mangle]
pub unsafe extern "C" fn cen_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Load an undirected graph from a whitespace- or comma-delimited edge
/// list file. On success writes a new handle to `out`.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cen_graph_load(path: *const c_char, out: *mut *mut CenGraph) -> c_int {
    let path = match read_str(path, "path") {
        Ok(s) => s,
        Err(code) => return code,
    };
    match load_edge_list(Path::new(path), None) {
        Ok(report) => write_handle(out, "graph", CenGraph {
            inner: report.graph,
        }),
        Err(e) => fail_error(&e),
    }
}

/// Generate a scale-free graph by preferential attachment: `n` vertices,
/// `m_attach` edges per arriving vertex, deterministic in `seed`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cen_graph_generate(
    n: usize,
    m_attach: usize,
    seed: u64,
    out: *mut *mut CenGraph,
) -> c_int {
    match generate_scale_free(n, m_attach, seed) {
        Ok(graph) => write_handle(out, "graph", CenGraph { inner: graph }),
        Err(e) => fail_error(&e),
    }
}

/// Release a graph handle. Null is ignored.
///
/// # Safety
/// `graph` must be null or a pointer from this library, freed only once.
#[no_mangle]
pub unsafe extern "C" fn cen_graph_free(graph: *mut CenGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cen_graph_vertex_count(graph: *const CenGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.n())
}

/// Number of undirected edges, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cen_graph_edge_count(graph: *const CenGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.edge_count())
}

/// Maximum-likelihood power-law exponent of the degree distribution,
/// counting vertices with degree at least `d_min`.
///
/// # Safety
/// `graph` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cen_graph_alpha(
    graph: *const CenGraph,
    d_min: f64,
    out: *mut f64,
) -> c_int {
    let Some(g) = graph.as_ref() else {
        return fail(CEN_EINVAL, "graph handle is null");
    };
    if out.is_null() {
        return fail(CEN_EINVAL, "alpha output pointer is null");
    }
    match estimate_power_law_alpha(g.inner.degrees(), d_min) {
        Ok(alpha) => {
            *out = alpha;
            CEN_OK
        }
        Err(e) => fail_error(&e),
    }
}

/// Run the centrality-driven transform: score vertices with the chosen
/// `measure` (a `CEN_MEASURE_*` code), take the top `hub_rate` fraction
/// (in (0, 1)) as hubs, propagate hub labels for `steps` rounds to sign
/// vertex-pair similarity, and reweight edges with exponents `p` and `q`
/// under the given `CEN_ABLATION_*` branch rule.
///
/// # Safety
/// `graph` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cen_transform(
    graph: *const CenGraph,
    measure: c_int,
    hub_rate: f64,
    p: f64,
    q: f64,
    steps: usize,
    ablation: c_int,
    out: *mut *mut CenTransformed,
) -> c_int {
    let Some(g) = graph.as_ref() else {
        return fail(CEN_EINVAL, "graph handle is null");
    };
    let measure = match measure {
        CEN_MEASURE_DEGREE => CentralityMeasure::Degree,
        CEN_MEASURE_EIGENVECTOR => CentralityMeasure::Eigenvector,
        other => return fail(CEN_EINVAL, &format!("unknown measure code {other}")),
    };
    let ablation = match ablation {
        CEN_ABLATION_FULL => Ablation::Full,
        CEN_ABLATION_INCREASE_ONLY => Ablation::IncreaseOnly,
        CEN_ABLATION_DECREASE_ONLY => Ablation::DecreaseOnly,
        other => return fail(CEN_EINVAL, &format!("unknown ablation code {other}")),
    };
    let transformed = (|| {
        let profile = CentralityProfile::compute(&g.inner, measure, hub_rate * 100.0)
            .map_err(|e| e.in_stage("centrality"))?;
        let transition = TransitionMatrix::build(&g.inner);
        let labels =
            propagate(&transition, &profile.hubs, steps).map_err(|e| e.in_stage("labelprop"))?;
        let signs = similarity_sign(&g.inner, &labels, &profile.hubs)
            .map_err(|e| e.in_stage("labelprop"))?;
        transform_graph(&g.inner, &profile, &signs, p, q, ablation)
            .map_err(|e| e.in_stage("transform"))
    })();
    match transformed {
        Ok(adjacency) => write_handle(out, "transform", CenTransformed { inner: adjacency }),
        Err(e) => fail_error(&e),
    }
}

/// Release a transformed-adjacency handle. Null is ignored.
///
/// # Safety
/// `transformed` must be null or a pointer from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn cen_transformed_free(transformed: *mut CenTransformed) {
    if !transformed.is_null() {
        drop(Box::from_raw(transformed));
    }
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `transformed` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cen_transformed_vertex_count(transformed: *const CenTransformed) -> usize {
    transformed.as_ref().map_or(0, |t| t.inner.n())
}

/// Number of stored off-diagonal edges (each undirected edge once), or 0
/// for a null handle.
///
/// # Safety
/// `transformed` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cen_transformed_edge_count(transformed: *const CenTransformed) -> usize {
    transformed.as_ref().map_or(0, |t| t.inner.edges().len())
}

/// Copy the diagonal (per-vertex self-connection weights) into `buf`,
/// which must hold at least `cen_transformed_vertex_count` entries.
///
/// # Safety
/// `transformed` must be a live handle; `buf` must point to `cap` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn cen_transformed_diagonal(
    transformed: *const CenTransformed,
    buf: *mut f64,
    cap: usize,
) -> c_int {
    let Some(t) = transformed.as_ref() else {
        return fail(CEN_EINVAL, "transform handle is null");
    };
    if buf.is_null() {
        return fail(CEN_EINVAL, "diagonal buffer is null");
    }
    let diag = t.inner.diag();
    if cap < diag.len() {
        return fail(
            CEN_EINVAL,
            &format!("diagonal needs capacity {}, got {cap}", diag.len()),
        );
    }
    std::ptr::copy_nonoverlapping(diag.as_ptr(), buf, diag.len());
    CEN_OK
}

/// Copy the off-diagonal edges into three parallel arrays in canonical
/// (row < col) order. Each array must hold at least
/// `cen_transformed_edge_count` entries.
///
/// # Safety
/// `transformed` must be a live handle; `rows`, `cols`, and `weights`
/// must each point to `cap` writable entries.
#[no_mangle]
pub unsafe extern "C" fn cen_transformed_edges(
    transformed: *const CenTransformed,
    rows: *mut usize,
    cols: *mut usize,
    weights: *mut f64,
    cap: usize,
) -> c_int {
    let Some(t) = transformed.as_ref() else {
        return fail(CEN_EINVAL, "transform handle is null");
    };
    if rows.is_null() || cols.is_null() || weights.is_null() {
        return fail(CEN_EINVAL, "edge buffer is null");
    }
    let edges = t.inner.edges();
    if cap < edges.len() {
        return fail(
            CEN_EINVAL,
            &format!("edges need capacity {}, got {cap}", edges.len()),
        );
    }
    for (k, &(i, j, w)) in edges.iter().enumerate() {
        *rows.add(k) = i;
        *cols.add(k) = j;
        *weights.add(k) = w;
    }
    CEN_OK
}

/// Train one run from configuration text in the same `key = value` format
/// the CLI reads (it must name an input via `graph = <path>` or
/// `generate_n = <count>`). On success writes a handle holding the
/// final-layer vertex representations and the task metric.
///
/// # Safety
/// `config_text` must be a nul-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn cen_train(config_text: *const c_char, out: *mut *mut CenModel) -> c_int {
    let text = match read_str(config_text, "config text") {
        Ok(s) => s,
        Err(code) => return code,
    };
    let trained = (|| {
        let mut cfg = RunConfig::parse(text)?;
        cfg.finalize()?;
        train_outputs(&cfg)
    })();
    match trained {
        Ok((outputs, metric)) => write_handle(out, "model", CenModel { outputs, metric }),
        Err(e) => fail_error(&e),
    }
}

/// Release a model handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a pointer from this library, freed only once.
#[no_mangle]
pub unsafe extern "C" fn cen_model_free(model: *mut CenModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of representation rows (vertices), or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cen_model_rows(model: *const CenModel) -> usize {
    model.as_ref().map_or(0, |m| m.outputs.nrows())
}

/// Number of representation columns (class scores or embedding
/// dimensions), or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cen_model_cols(model: *const CenModel) -> usize {
    model.as_ref().map_or(0, |m| m.outputs.ncols())
}

/// Copy the vertex representations row-major into `buf`, which must hold
/// at least rows*cols entries.
///
/// # Safety
/// `model` must be a live handle; `buf` must point to `cap` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn cen_model_outputs(
    model: *const CenModel,
    buf: *mut f64,
    cap: usize,
) -> c_int {
    let Some(m) = model.as_ref() else {
        return fail(CEN_EINVAL, "model handle is null");
    };
    if buf.is_null() {
        return fail(CEN_EINVAL, "output buffer is null");
    }
    let needed = m.outputs.nrows() * m.outputs.ncols();
    if cap < needed {
        return fail(
            CEN_EINVAL,
            &format!("outputs need capacity {needed}, got {cap}"),
        );
    }
    let cols = m.outputs.ncols();
    for ((i, j), &v) in m.outputs.indexed_iter() {
        *buf.add(i * cols + j) = v;
    }
    CEN_OK
}

/// The task metric of the trained run: test accuracy for classification,
/// AUC for link prediction, NMI for clustering.
///
/// # Safety
/// `model` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cen_model_metric(model: *const CenModel, out: *mut f64) -> c_int {
    let Some(m) = model.as_ref() else {
        return fail(CEN_EINVAL, "model handle is null");
    };
    if out.is_null() {
        return fail(CEN_EINVAL, "metric output pointer is null");
    }
    *out = m.metric;
    CEN_OK
}

/// Write the vertex representations to `path` as CSV, one row per vertex.
///
/// # Safety
/// `model` must be a live handle; `path` must be a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cen_model_save_outputs(
    model: *const CenModel,
    path: *const c_char,
) -> c_int {
    let Some(m) = model.as_ref() else {
        return fail(CEN_EINVAL, "model handle is null");
    };
    let path = match read_str(path, "path") {
        Ok(s) => s,
        Err(code) => return code,
    };
    match export_embeddings(&m.outputs, Path::new(path)) {
        Ok(()) => CEN_OK,
        Err(e) => fail_error(&e),
    }
}

/// Mann-Whitney AUC of `scores` against binary `labels` (nonzero means
/// positive), ties counting one half.
///
/// # Safety
/// `scores` and `labels` must each point to `len` readable entries; `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cen_auc(
    scores: *const f64,
    labels: *const c_int,
    len: usize,
    out: *mut f64,
) -> c_int {
    if scores.is_null() || labels.is_null() {
        return fail(CEN_EINVAL, "scores or labels pointer is null");
    }
    if out.is_null() {
        return fail(CEN_EINVAL, "auc output pointer is null");
    }
    let scores = std::slice::from_raw_parts(scores, len);
    let labels: Vec<usize> = std::slice::from_raw_parts(labels, len)
        .iter()
        .map(|&y| usize::from(y != 0))
        .collect();
    match auc(scores, &labels) {
        Ok(value) => {
            *out = value;
            CEN_OK
        }
        Err(e) => fail_error(&e),
    }
}

/// Normalized mutual information between two partitions given as
/// non-negative cluster ids.
///
/// # Safety
/// `a` and `b` must each point to `len` readable entries; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cen_nmi(
    a: *const c_int,
    b: *const c_int,
    len: usize,
    out: *mut f64,
) -> c_int {
    if a.is_null() || b.is_null() {
        return fail(CEN_EINVAL, "partition pointer is null");
    }
    if out.is_null() {
        return fail(CEN_EINVAL, "nmi output pointer is null");
    }
    let read = |ptr: *const c_int| -> Result<Vec<usize>, c_int> {
        std::slice::from_raw_parts(ptr, len)
            .iter()
            .map(|&y| {
                usize::try_from(y)
                    .map_err(|_| fail(CEN_EINVAL, &format!("negative cluster id {y}")))
            })
            .collect()
    };
    let a = match read(a) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let b = match read(b) {
        Ok(v) => v,
        Err(code) => return code,
    };
    match nmi(&a, &b) {
        Ok(value) => {
            *out = value;
            CEN_OK
        }
        Err(e) => fail_error(&e),
    }
}
