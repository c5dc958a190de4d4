#ifndef RMDP_H
#define RMDP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RmdpStatus {
  RMDP_STATUS_OK = 0,
  RMDP_STATUS_NULL_POINTER = 1,
  RMDP_STATUS_INVALID_ARGUMENT = 2,
  RMDP_STATUS_PARSE = 3,
  RMDP_STATUS_VALIDATION = 4,
  RMDP_STATUS_INFEASIBLE_MARGIN = 5,
  RMDP_STATUS_SIZE_LIMIT = 6,
  RMDP_STATUS_IO = 7,
  // Value iteration hit its iteration cap; outputs hold the last iterate.
  RMDP_STATUS_NOT_CONVERGED = 8,
  RMDP_STATUS_PANIC = 9,
} RmdpStatus;

typedef enum RmdpDivergence {
  RMDP_DIVERGENCE_KL = 0,
  RMDP_DIVERGENCE_BURG = 1,
  RMDP_DIVERGENCE_VARIATION = 2,
  RMDP_DIVERGENCE_CHI_SQUARED = 3,
} RmdpDivergence;

typedef enum RmdpProjectionStatus {
  RMDP_PROJECTION_STATUS_SOLVED = 0,
  // The nominal distribution already satisfies the threshold.
  RMDP_PROJECTION_STATUS_TRIVIAL = 1,
  // No distribution satisfies the threshold; bounds are +inf.
  RMDP_PROJECTION_STATUS_INFEASIBLE = 2,
} RmdpProjectionStatus;

// Opaque handle to a validated RMDP instance.
typedef struct RmdpInstance RmdpInstance;

// Value bracket of one projection. `alpha` and `zeta` are NaN when absent.
typedef struct RmdpProjection {
  double lower;
  double upper;
  double alpha;
  double zeta;
  enum RmdpProjectionStatus status;
  size_t iterations;
} RmdpProjection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses and validates an instance document.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum RmdpStatus rmdp_instance_from_json(const char *json, struct RmdpInstance **out);

// Loads an instance document from disk.
//
// # Safety
// `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
enum RmdpStatus rmdp_instance_read_file(const char *path, struct RmdpInstance **out);

// Generates a seeded random instance (`kappa ~ U(0,1)`, rewards `U(0,1)`).
//
// # Safety
// `out` must be writable.
enum RmdpStatus rmdp_generate_instance(size_t states,
                                       size_t actions,
                                       uint64_t seed,
                                       double discount,
                                       enum RmdpDivergence divergence,
                                       struct RmdpInstance **out);

// Releases an instance. NULL is ignored.
//
// # Safety
// `instance` must come from this library and not be used afterwards.
void rmdp_instance_free(struct RmdpInstance *instance);

// Number of states, or 0 for NULL.
//
// # Safety
// `instance` must be NULL or a live handle.
size_t rmdp_instance_states(const struct RmdpInstance *instance);

// Number of actions, or 0 for NULL.
//
// # Safety
// `instance` must be NULL or a live handle.
size_t rmdp_instance_actions(const struct RmdpInstance *instance);

// Serializes an instance; release the string with `rmdp_string_free`.
//
// # Safety
// `instance` must be a live handle; `out` must be writable.
enum RmdpStatus rmdp_instance_to_json(const struct RmdpInstance *instance, char **out);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void rmdp_string_free(char *s);

// Solves `min d(p, nominal) s.t. cost'p <= threshold, p in simplex`.
//
// # Safety
// `nominal` and `cost` must point to `len` doubles; `out` must be writable.
enum RmdpStatus rmdp_project(enum RmdpDivergence divergence,
                             const double *nominal,
                             const double *cost,
                             size_t len,
                             double threshold,
                             double delta,
                             struct RmdpProjection *out);

// One ε-accurate robust Bellman update; writes `states` doubles.
//
// # Safety
// `v` must point to `len` doubles and `out_values` to `states` writable
// doubles.
enum RmdpStatus rmdp_robust_bellman(const struct RmdpInstance *instance,
                                    const double *v,
                                    size_t len,
                                    double epsilon,
                                    double *out_values);

// Robust value iteration to accuracy `epsilon`. Writes `states` doubles to
// `out_values`; `out_iterations` and `out_residual` may be NULL. Returns
// `NotConverged` (with outputs filled) when `max_iters` is reached.
//
// # Safety
// `out_values` must point to `states` writable doubles; the optional
// outputs must be NULL or writable.
enum RmdpStatus rmdp_value_iteration(const struct RmdpInstance *instance,
                                     double epsilon,
                                     size_t max_iters,
                                     double *out_values,
                                     size_t *out_iterations,
                                     double *out_residual);

// Policy extracted at `v`, written row-major as `states * actions` doubles.
//
// # Safety
// `v` must point to `len` doubles and `out_probabilities` to
// `states * actions` writable doubles.
enum RmdpStatus rmdp_extract_policy(const struct RmdpInstance *instance,
                                    const double *v,
                                    size_t len,
                                    double epsilon,
                                    double *out_probabilities);

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into this library on the same thread.
const char *rmdp_last_error_message(void);

// Library version, statically allocated.
const char *rmdp_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RMDP_H */
