#ifndef BANDITLAB_H
#define BANDITLAB_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BlStatus {
  BL_STATUS_OK = 0,
  BL_STATUS_NULL_POINTER = 1,
  BL_STATUS_INVALID_ARGUMENT = 2,
  BL_STATUS_OUT_OF_RANGE = 3,
  BL_STATUS_SINGULAR = 4,
  BL_STATUS_UNSUPPORTED = 5,
  BL_STATUS_INFEASIBLE = 6,
  BL_STATUS_PARSE = 7,
  BL_STATUS_NUMERICAL = 8,
  BL_STATUS_IO = 9,
  BL_STATUS_BUFFER_TOO_SMALL = 10,
  BL_STATUS_PANIC = 11,
} BlStatus;

/**
 * Active learning pool with its regression class.
 */
typedef struct BlAlPool BlAlPool;

/**
 * Linear bandit instance.
 */
typedef struct BlInstance BlInstance;

/**
 * Seeded random stream.
 */
typedef struct BlRng BlRng;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t bl_last_error(char *buf, size_t len);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum BlStatus bl_rng_new(uint64_t seed, struct BlRng **out);

/**
 * # Safety
 * `rng` must come from [`bl_rng_new`] and not be used afterwards.
 */
void bl_rng_free(struct BlRng *rng);

/**
 * Parses the instance text format.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BlStatus bl_instance_parse(const char *src, struct BlInstance **out);

/**
 * Hard pure-exploration instance in dimension `dstar + 1`; `sigma` is the
 * Gaussian noise level.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum BlStatus bl_instance_hard(size_t dstar, double epsilon, double sigma, struct BlInstance **out);

/**
 * # Safety
 * `inst` must come from this library and not be used afterwards.
 */
void bl_instance_free(struct BlInstance *inst);

/**
 * Dimension, action count and best target index.
 *
 * # Safety
 * All pointers must be valid.
 */
enum BlStatus bl_instance_shape(const struct BlInstance *inst,
                                size_t *dim,
                                size_t *num_actions,
                                size_t *best_target);

/**
 * Pure-exploration complexity of the instance truncated to `d` coordinates.
 *
 * # Safety
 * All pointers must be valid.
 */
enum BlStatus bl_rho_star(const struct BlInstance *inst, size_t d, double epsilon, double *out);

/**
 * Barycentric spanner of the actions. Writes up to `cap` member indices to
 * `members` and the spanner size to `len`; fails with `BufferTooSmall` if
 * `cap` is below the size.
 *
 * # Safety
 * `members` must be valid for `cap` writes; the other pointers must be valid.
 */
enum BlStatus bl_spanner(const struct BlInstance *inst,
                         double c,
                         size_t *members,
                         size_t cap,
                         size_t *len);

/**
 * Fixed-confidence identification with unknown intrinsic dimension. Writes the
 * final recommendation and the samples used; `tau` receives the samples after
 * which the recommendation stayed at the best target, or `UINT64_MAX`.
 *
 * # Safety
 * All pointers must be valid.
 */
enum BlStatus bl_adaptive_fc(const struct BlInstance *inst,
                             double delta,
                             bool robust,
                             uint64_t cap,
                             struct BlRng *rng,
                             size_t *arm,
                             uint64_t *samples,
                             uint64_t *tau);

/**
 * Fixed-budget identification with `total` samples.
 *
 * # Safety
 * All pointers must be valid.
 */
enum BlStatus bl_adaptive_fb(const struct BlInstance *inst,
                             uint64_t total,
                             struct BlRng *rng,
                             size_t *arm);

/**
 * Parses a pool of `weight eta` lines; the class is η and its single-point reflections.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BlStatus bl_al_pool_parse(const char *src, struct BlAlPool **out);

/**
 * # Safety
 * `pool` must come from this library and not be used afterwards.
 */
void bl_al_pool_free(struct BlAlPool *pool);

/**
 * Epoch active learner with abstention; writes the label count and the
 * exact Chow excess of the returned classifier.
 *
 * # Safety
 * All pointers must be valid.
 */
enum BlStatus bl_epoch_al(const struct BlAlPool *pool,
                          double epsilon,
                          double gamma,
                          double delta,
                          struct BlRng *rng,
                          uint64_t *labels,
                          double *excess);

/**
 * Runs an experiment from `key = value` config text and returns the CSV.
 * Release the string with [`bl_string_free`].
 *
 * # Safety
 * `config` must be a NUL-terminated string and `csv` a valid pointer.
 */
enum BlStatus bl_run_experiment(const char *config, char **csv);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void bl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BANDITLAB_H */
