/* C interface to the cengcn centrality-driven GCN library. */

#ifndef CENGCN_H
#define CENGCN_H

/* Generated by cbindgen from cengcn-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Success.
 */
#define CEN_OK 0

/**
 * Invalid argument at the C boundary: null pointer, non-UTF-8 string,
 * undersized buffer, or unknown enum code.
 */
#define CEN_EINVAL 1

/**
 * Invalid parameter or contradictory configuration.
 */
#define CEN_ECONFIG 2

/**
 * Malformed or inconsistent input data.
 */
#define CEN_EDATA 3

/**
 * Numerical failure (divergence, non-convergence, NaN).
 */
#define CEN_ENUMERIC 4

/**
 * Filesystem failure.
 */
#define CEN_EIO 5

/**
 * Degree centrality selector for `cen_transform`.
 */
#define CEN_MEASURE_DEGREE 0

/**
 * Eigenvector centrality selector for `cen_transform`.
 */
#define CEN_MEASURE_EIGENVECTOR 1

/**
 * Transform with propagated similarity signs deciding each branch.
 */
#define CEN_ABLATION_FULL 0

/**
 * Transform forcing the weight-increase branch on every edge.
 */
#define CEN_ABLATION_INCREASE_ONLY 1

/**
 * Transform forcing the weight-decrease branch on every edge.
 */
#define CEN_ABLATION_DECREASE_ONLY 2

/**
 * An undirected graph behind the C boundary.
 */
typedef struct CenGraph CenGraph;

/**
 * A trained run: final-layer vertex representations and the task metric.
 */
typedef struct CenModel CenModel;

/**
 * A transformed adjacency: per-vertex diagonal plus reweighted edges.
 */
typedef struct CenTransformed CenTransformed;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or an empty string
 * if none has occurred. The pointer stays valid until the next failing
 * call on the same thread.
 *
 * # Safety
 * The returned pointer must not be freed or written through.
 */
const char *cen_last_error(void);

/**
 * Load an undirected graph from a whitespace- or comma-delimited edge
 * list file. On success writes a new handle to `out`.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be a valid pointer.
 */
int cen_graph_load(const char *path, struct CenGraph **out);

/**
 * Generate a scale-free graph by preferential attachment: `n` vertices,
 * `m_attach` edges per arriving vertex, deterministic in `seed`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
int cen_graph_generate(uintptr_t n, uintptr_t m_attach, uint64_t seed, struct CenGraph **out);

/**
 * Release a graph handle. Null is ignored.
 *
 * # Safety
 * `graph` must be null or a pointer from this library, freed only once.
 */
void cen_graph_free(struct CenGraph *graph);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle from this library.
 */
uintptr_t cen_graph_vertex_count(const struct CenGraph *graph);

/**
 * Number of undirected edges, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle from this library.
 */
uintptr_t cen_graph_edge_count(const struct CenGraph *graph);

/**
 * Maximum-likelihood power-law exponent of the degree distribution,
 * counting vertices with degree at least `d_min`.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be a valid pointer.
 */
int cen_graph_alpha(const struct CenGraph *graph, double d_min, double *out);

/**
 * Run the centrality-driven transform: score vertices with the chosen
 * `measure` (a `CEN_MEASURE_*` code), take the top `hub_rate` fraction
 * (in (0, 1)) as hubs, propagate hub labels for `steps` rounds to sign
 * vertex-pair similarity, and reweight edges with exponents `p` and `q`
 * under the given `CEN_ABLATION_*` branch rule.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be a valid pointer.
 */
int cen_transform(const struct CenGraph *graph,
                  int measure,
                  double hub_rate,
                  double p,
                  double q,
                  uintptr_t steps,
                  int ablation,
                  struct CenTransformed **out);

/**
 * Release a transformed-adjacency handle. Null is ignored.
 *
 * # Safety
 * `transformed` must be null or a pointer from this library, freed once.
 */
void cen_transformed_free(struct CenTransformed *transformed);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `transformed` must be null or a live handle from this library.
 */
uintptr_t cen_transformed_vertex_count(const struct CenTransformed *transformed);

/**
 * Number of stored off-diagonal edges (each undirected edge once), or 0
 * for a null handle.
 *
 * # Safety
 * `transformed` must be null or a live handle from this library.
 */
uintptr_t cen_transformed_edge_count(const struct CenTransformed *transformed);

/**
 * Copy the diagonal (per-vertex self-connection weights) into `buf`,
 * which must hold at least `cen_transformed_vertex_count` entries.
 *
 * # Safety
 * `transformed` must be a live handle; `buf` must point to `cap` writable
 * doubles.
 */
int cen_transformed_diagonal(const struct CenTransformed *transformed, double *buf, uintptr_t cap);

/**
 * Copy the off-diagonal edges into three parallel arrays in canonical
 * (row < col) order. Each array must hold at least
 * `cen_transformed_edge_count` entries.
 *
 * # Safety
 * `transformed` must be a live handle; `rows`, `cols`, and `weights`
 * must each point to `cap` writable entries.
 */
int cen_transformed_edges(const struct CenTransformed *transformed,
                          uintptr_t *rows,
                          uintptr_t *cols,
                          double *weights,
                          uintptr_t cap);

/**
 * Train one run from configuration text in the same `key = value` format
 * the CLI reads (it must name an input via `graph = <path>` or
 * `generate_n = <count>`). On success writes a handle holding the
 * final-layer vertex representations and the task metric.
 *
 * # Safety
 * `config_text` must be a nul-terminated string; `out` must be a valid
 * pointer.
 */
int cen_train(const char *config_text, struct CenModel **out);

/**
 * Release a model handle. Null is ignored.
 *
 * # Safety
 * `model` must be null or a pointer from this library, freed only once.
 */
void cen_model_free(struct CenModel *model);

/**
 * Number of representation rows (vertices), or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle from this library.
 */
uintptr_t cen_model_rows(const struct CenModel *model);

/**
 * Number of representation columns (class scores or embedding
 * dimensions), or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle from this library.
 */
uintptr_t cen_model_cols(const struct CenModel *model);

/**
 * Copy the vertex representations row-major into `buf`, which must hold
 * at least rows*cols entries.
 *
 * # Safety
 * `model` must be a live handle; `buf` must point to `cap` writable
 * doubles.
 */
int cen_model_outputs(const struct CenModel *model, double *buf, uintptr_t cap);

/**
 * The task metric of the trained run: test accuracy for classification,
 * AUC for link prediction, NMI for clustering.
 *
 * # Safety
 * `model` must be a live handle; `out` must be a valid pointer.
 */
int cen_model_metric(const struct CenModel *model, double *out);

/**
 * Write the vertex representations to `path` as CSV, one row per vertex.
 *
 * # Safety
 * `model` must be a live handle; `path` must be a nul-terminated string.
 */
int cen_model_save_outputs(const struct CenModel *model, const char *path);

/**
 * Mann-Whitney AUC of `scores` against binary `labels` (nonzero means
 * positive), ties counting one half.
 *
 * # Safety
 * `scores` and `labels` must each point to `len` readable entries; `out`
 * must be a valid pointer.
 */
int cen_auc(const double *scores, const int *labels, uintptr_t len, double *out);

/**
 * Normalized mutual information between two partitions given as
 * non-negative cluster ids.
 *
 * # Safety
 * `a` and `b` must each point to `len` readable entries; `out` must be a
 * valid pointer.
 */
int cen_nmi(const int *a, const int *b, uintptr_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CENGCN_H */
