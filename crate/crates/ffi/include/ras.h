#ifndef RAS_H
#define RAS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RasStatus {
  RAS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RAS_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  RAS_STATUS_INVALID_UTF8 = 2,
  /**
   * A buffer length did not match the object it describes.
   */
  RAS_STATUS_LENGTH_MISMATCH = 3,
  /**
   * Malformed input, schema violation or bad configuration.
   */
  RAS_STATUS_DATA = 4,
  /**
   * Training divergence or an undefined metric.
   */
  RAS_STATUS_NUMERICAL = 5,
  RAS_STATUS_IO = 6,
  /**
   * The library panicked. Handles passed to the call stay valid.
   */
  RAS_STATUS_PANIC = 7,
} RasStatus;

/**
 * Fitted K-means partition.
 */
typedef struct RasClusterModel RasClusterModel;

/**
 * Row-major matrix of doubles.
 */
typedef struct RasMatrix RasMatrix;

/**
 * Trained stacked autoencoder.
 */
typedef struct RasSaeModel RasSaeModel;

typedef struct RasKMeansOptions {
  size_t restarts;
  size_t max_iter;
  double tol;
} RasKMeansOptions;

/**
 * Internal validation scores. `dunn` may be `INFINITY`.
 */
typedef struct RasMetrics {
  double silhouette;
  double davies_bouldin;
  double dunn;
  size_t k;
  size_t n;
} RasMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next library call on the same thread.
 */
const char *ras_last_error_message(void);

/**
 * Static version string.
 */
const char *ras_version(void);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void ras_string_free(char *s);

/**
 * Normalizes Arabic text: URLs, diacritics and tatweel removed, letter
 * variants folded, non-Arabic characters dropped, whitespace collapsed.
 * `*out` receives a new string to release with `ras_string_free`.
 *
 * # Safety
 * `raw` must be a NUL-terminated string; `out` must be writable.
 */
enum RasStatus ras_preprocess_text(const char *raw, char **out);

/**
 * Copies `rows * cols` row-major values into a new matrix.
 *
 * # Safety
 * `data` must point to `rows * cols` doubles (it may be null when that
 * product is 0); `out` must be writable.
 */
enum RasStatus ras_matrix_new(const double *data, size_t rows, size_t cols, struct RasMatrix **out);

/**
 * # Safety
 * `m` must be null or a live matrix handle; it is invalid afterwards.
 */
void ras_matrix_free(struct RasMatrix *m);

/**
 * Row count, 0 for null.
 *
 * # Safety
 * `m` must be null or a live matrix handle.
 */
size_t ras_matrix_rows(const struct RasMatrix *m);

/**
 * Column count, 0 for null.
 *
 * # Safety
 * `m` must be null or a live matrix handle.
 */
size_t ras_matrix_cols(const struct RasMatrix *m);

/**
 * Copies the matrix row-major into `buf`, which must hold exactly
 * `rows * cols` values.
 *
 * # Safety
 * `m` must be a live matrix handle; `buf` must point to `len` writable doubles.
 */
enum RasStatus ras_matrix_copy(const struct RasMatrix *m, double *buf, size_t len);

/**
 * Ten restarts, 300 iterations, tolerance 1e-4.
 */
struct RasKMeansOptions ras_kmeans_default_options(void);

/**
 * K-means++ with restarts on the rows of `features`. Restart `r` draws from
 * stream `r` of `seed`. `options` may be null for the defaults.
 *
 * # Safety
 * `features` must be a live matrix handle, `options` null or readable, `out`
 * writable.
 */
enum RasStatus ras_kmeans_fit(const struct RasMatrix *features,
                              size_t k,
                              uint64_t seed,
                              const struct RasKMeansOptions *options,
                              struct RasClusterModel **out);

/**
 * # Safety
 * `m` must be null or a live cluster model handle; it is invalid afterwards.
 */
void ras_cluster_model_free(struct RasClusterModel *m);

/**
 * Cluster count, 0 for null.
 *
 * # Safety
 * `m` must be null or a live cluster model handle.
 */
size_t ras_cluster_model_k(const struct RasClusterModel *m);

/**
 * Point count, 0 for null.
 *
 * # Safety
 * `m` must be null or a live cluster model handle.
 */
size_t ras_cluster_model_len(const struct RasClusterModel *m);

/**
 * Within-cluster sum of squared distances, NaN for null.
 *
 * # Safety
 * `m` must be null or a live cluster model handle.
 */
double ras_cluster_model_inertia(const struct RasClusterModel *m);

/**
 * Copies the labels (one per input row) into `buf`.
 *
 * # Safety
 * `m` must be a live cluster model handle; `buf` must hold `len` values.
 */
enum RasStatus ras_cluster_model_labels(const struct RasClusterModel *m, size_t *buf, size_t len);

/**
 * Centroids as a new `k x d` matrix.
 *
 * # Safety
 * `m` must be a live cluster model handle; `out` must be writable.
 */
enum RasStatus ras_cluster_model_centroids(const struct RasClusterModel *m, struct RasMatrix **out);

/**
 * Silhouette, Davies-Bouldin and Dunn for `labels` over the rows of
 * `features`. Fails with `RAS_STATUS_NUMERICAL` when a score is undefined,
 * e.g. for a single cluster.
 *
 * # Safety
 * `features` must be a live matrix handle, `labels` must hold `len` values,
 * `out` must be writable.
 */
enum RasStatus ras_metrics_evaluate(const struct RasMatrix *features,
                                    const size_t *labels,
                                    size_t len,
                                    struct RasMetrics *out);

/**
 * Trains an autoencoder on `data` (values in [0, 1]). `config_json` is an
 * SAE configuration object; null or `"{}"` selects the defaults.
 *
 * # Safety
 * `data` must be a live matrix handle, `config_json` null or a
 * NUL-terminated string, `out` writable.
 */
enum RasStatus ras_sae_train(const struct RasMatrix *data,
                             const char *config_json,
                             struct RasSaeModel **out);

/**
 * Loads a model written by `ras train` or `ras_sae_model_save`.
 *
 * # Safety
 * `path` must be a NUL-terminated string, `out` writable.
 */
enum RasStatus ras_sae_model_load(const char *path, struct RasSaeModel **out);

/**
 * # Safety
 * `m` must be a live model handle and `path` a NUL-terminated string.
 */
enum RasStatus ras_sae_model_save(const struct RasSaeModel *m, const char *path);

/**
 * # Safety
 * `m` must be null or a live model handle; it is invalid afterwards.
 */
void ras_sae_model_free(struct RasSaeModel *m);

/**
 * Input width, 0 for null.
 *
 * # Safety
 * `m` must be null or a live model handle.
 */
size_t ras_sae_model_input_dim(const struct RasSaeModel *m);

/**
 * Code width, 0 for null.
 *
 * # Safety
 * `m` must be null or a live model handle.
 */
size_t ras_sae_model_code_dim(const struct RasSaeModel *m);

/**
 * Encoder output for every row of `data`, as a new matrix.
 *
 * # Safety
 * `m` and `data` must be live handles; `out` must be writable.
 */
enum RasStatus ras_sae_encode(const struct RasSaeModel *m,
                              const struct RasMatrix *data,
                              struct RasMatrix **out);

/**
 * Runs the whole pipeline from a JSON configuration file, writing every
 * artifact to its output directory. `out_metrics` may be null.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string; `out_metrics` null or
 * writable.
 */
enum RasStatus ras_pipeline_run(const char *config_path, struct RasMetrics *out_metrics);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RAS_H */
