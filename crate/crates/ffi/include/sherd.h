#ifndef SHERD_H
#define SHERD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SherdStatus {
  SHERD_STATUS_OK = 0,
  SHERD_STATUS_NULL_POINTER = 1,
  SHERD_STATUS_INVALID_ARGUMENT = 2,
  SHERD_STATUS_INVALID_INPUT = 3,
  SHERD_STATUS_IO = 4,
  SHERD_STATUS_PARSE = 5,
  SHERD_STATUS_NUMERIC = 6,
  SHERD_STATUS_INVALID_CUT = 7,
  SHERD_STATUS_MISSING_CACHE = 8,
  SHERD_STATUS_PANIC = 9,
} SherdStatus;

typedef enum SherdProcrustesMode {
  SHERD_PROCRUSTES_MODE_STANDARDIZED = 0,
  SHERD_PROCRUSTES_MODE_RAW = 1,
} SherdProcrustesMode;

typedef enum SherdComponent {
  SHERD_COMPONENT_PA = 0,
  SHERD_COMPONENT_DC = 1,
  SHERD_COMPONENT_GAMMA = 2,
} SherdComponent;

typedef enum SherdMethod {
  SHERD_METHOD_SINGLE = 0,
  SHERD_METHOD_AVERAGE = 1,
  SHERD_METHOD_WEIGHTED = 2,
} SherdMethod;

/**
 * Opaque pa / dc / gamma matrices.
 */
typedef struct SherdComponents SherdComponents;

/**
 * Opaque contour set.
 */
typedef struct SherdContourSet SherdContourSet;

/**
 * Opaque dendrogram.
 */
typedef struct SherdDendrogram SherdDendrogram;

/**
 * Opaque assembled similarity matrix.
 */
typedef struct SherdSimilarity SherdSimilarity;

typedef struct SherdProcrustesResult {
  double d;
  double gamma_star;
  double theta_star;
  double tx;
  double ty;
} SherdProcrustesResult;

typedef struct SherdWeights {
  double mu;
  double lambda;
  double omega;
  bool use_ndc;
  bool use_ngamma;
} SherdWeights;

typedef struct SherdMerge {
  size_t a;
  size_t b;
  double height;
  size_t size;
} SherdMerge;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sherd_last_error(void);

/**
 * DTW cost between two point sequences. `band <= 0` searches the full
 * cost matrix.
 *
 * # Safety
 * `x` and `y` must point to `2 * n` and `2 * m` doubles.
 */
enum SherdStatus sherd_dtw(const double *x,
                           size_t n,
                           const double *y,
                           size_t m,
                           double band_width,
                           double *out_cost);

/**
 * Procrustes superimposition of `moving` onto `target`, both `k` points.
 * `out_z`, if not null, receives the `2 * k` aligned coordinates.
 *
 * # Safety
 * `target` and `moving` must point to `2 * k` doubles; `out_z` is null or
 * points to `2 * k` writable doubles.
 */
enum SherdStatus sherd_procrustes(const double *target,
                                  const double *moving,
                                  size_t k,
                                  enum SherdProcrustesMode mode,
                                  struct SherdProcrustesResult *out,
                                  double *out_z);

/**
 * Loads the contours named by a manifest file.
 *
 * # Safety
 * `manifest_path` must be a NUL-terminated string; `out` must be writable.
 */
enum SherdStatus sherd_contour_set_load(const char *manifest_path, struct SherdContourSet **out);

/**
 * # Safety
 * `set` must be null or a live handle.
 */
size_t sherd_contour_set_len(const struct SherdContourSet *set);

/**
 * Id of contour `index`, or null when out of range. Owned by the handle.
 *
 * # Safety
 * `set` must be null or a live handle.
 */
const char *sherd_contour_set_id(const struct SherdContourSet *set, size_t index);

/**
 * # Safety
 * `set` must be null or a handle not yet freed.
 */
void sherd_contour_set_free(struct SherdContourSet *set);

/**
 * Pairwise components at `resample` points per curve (0 selects the
 * default). `band <= 0` disables the DTW band.
 *
 * # Safety
 * `set` must be a live handle; `out` must be writable.
 */
enum SherdStatus sherd_components_compute(const struct SherdContourSet *set,
                                          size_t resample,
                                          double band_width,
                                          struct SherdComponents **out);

/**
 * Reads the component cache of a dataset directory.
 *
 * # Safety
 * `dataset_dir` must be a NUL-terminated string; `out` must be writable.
 */
enum SherdStatus sherd_components_load(const char *dataset_dir, struct SherdComponents **out);

/**
 * # Safety
 * `components` must be null or a live handle.
 */
size_t sherd_components_len(const struct SherdComponents *components);

/**
 * # Safety
 * `components` must be null or a live handle.
 */
const char *sherd_components_id(const struct SherdComponents *components, size_t index);

/**
 * Copies one component matrix into `out` (`len` must be `n * n`).
 *
 * # Safety
 * `components` must be a live handle; `out` must point to `len` doubles.
 */
enum SherdStatus sherd_components_copy(const struct SherdComponents *components,
                                       enum SherdComponent which,
                                       double *out,
                                       size_t len);

/**
 * # Safety
 * `components` must be null or a handle not yet freed.
 */
void sherd_components_free(struct SherdComponents *components);

/**
 * Weights of a named preset such as `"WNDCNSM(3/4,1/4)"`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum SherdStatus sherd_preset_weights(const char *name, struct SherdWeights *out);

/**
 * Weighted similarity matrix, averaged with its transpose.
 *
 * # Safety
 * `components` must be a live handle; `out` must be writable.
 */
enum SherdStatus sherd_similarity_assemble(const struct SherdComponents *components,
                                           struct SherdWeights weights,
                                           struct SherdSimilarity **out);

/**
 * # Safety
 * `sm` must be null or a live handle.
 */
size_t sherd_similarity_len(const struct SherdSimilarity *sm);

/**
 * # Safety
 * `sm` must be a live handle; `out` must point to `len` doubles.
 */
enum SherdStatus sherd_similarity_copy(const struct SherdSimilarity *sm, double *out, size_t len);

/**
 * # Safety
 * `sm` must be null or a handle not yet freed.
 */
void sherd_similarity_free(struct SherdSimilarity *sm);

/**
 * Agglomerative clustering of an assembled similarity matrix.
 *
 * # Safety
 * `sm` must be a live handle; `out` must be writable.
 */
enum SherdStatus sherd_linkage(const struct SherdSimilarity *sm,
                               enum SherdMethod method,
                               struct SherdDendrogram **out);

/**
 * Agglomerative clustering of a raw row-major `n * n` distance matrix.
 *
 * # Safety
 * `distances` must point to `n * n` doubles; `out` must be writable.
 */
enum SherdStatus sherd_linkage_matrix(const double *distances,
                                      size_t n,
                                      enum SherdMethod method,
                                      struct SherdDendrogram **out);

/**
 * Number of merges, `n - 1`.
 *
 * # Safety
 * `d` must be null or a live handle.
 */
size_t sherd_dendrogram_merge_count(const struct SherdDendrogram *d);

/**
 * Merge `k`; the cluster it creates has id `n + k`.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum SherdStatus sherd_dendrogram_merge(const struct SherdDendrogram *d,
                                        size_t k,
                                        struct SherdMerge *out);

/**
 * Cophenetic correlation between `sm` and the dendrogram built from it.
 *
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum SherdStatus sherd_cophenetic_coefficient(const struct SherdSimilarity *sm,
                                              const struct SherdDendrogram *d,
                                              double *out);

/**
 * Single-level cut at `height`; labels are numbered by first leaf.
 *
 * # Safety
 * `d` must be a live handle; `labels` must point to `len` entries.
 */
enum SherdStatus sherd_cut_height(const struct SherdDendrogram *d,
                                  double height,
                                  size_t *labels,
                                  size_t len);

/**
 * Multi-level cut at the given subtree roots, which must cover every leaf
 * exactly once.
 *
 * # Safety
 * `d` must be a live handle; `nodes` must point to `count` ids and
 * `labels` to `len` entries.
 */
enum SherdStatus sherd_cut_nodes(const struct SherdDendrogram *d,
                                 const size_t *nodes,
                                 size_t count,
                                 size_t *labels,
                                 size_t len);

/**
 * # Safety
 * `d` must be null or a handle not yet freed.
 */
void sherd_dendrogram_free(struct SherdDendrogram *d);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHERD_H */
