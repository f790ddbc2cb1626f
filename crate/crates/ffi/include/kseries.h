#ifndef KSERIES_H
#define KSERIES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KsStatus {
  KS_STATUS_OK = 0,
  KS_STATUS_NULL_POINTER = 1,
  KS_STATUS_INVALID_UTF8 = 2,
  KS_STATUS_INVALID_ARGUMENT = 3,
  KS_STATUS_PARSE = 4,
  KS_STATUS_INSUFFICIENT_MOMENTS = 5,
  KS_STATUS_MOMENT_MATRIX_NOT_PD = 6,
  KS_STATUS_QUADRATURE = 7,
  KS_STATUS_DIMENSION_MISMATCH = 8,
  KS_STATUS_SINGULAR_SYSTEM = 9,
  KS_STATUS_INVALID_DISTRIBUTION = 10,
  KS_STATUS_INVALID_MOMENTS = 11,
  KS_STATUS_DEGENERATE_ESTIMATE = 12,
  KS_STATUS_NUMERIC_OVERFLOW = 13,
  KS_STATUS_IO = 14,
  KS_STATUS_PANIC = 15,
} KsStatus;

typedef struct KsEstimate KsEstimate;

/*
 Moment tensor (univariate moments are the one-dimensional case).
 */
typedef struct KsMoments KsMoments;

typedef struct KsReference KsReference;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or NULL. Valid until the
 next call into the library from the same thread.
 */
const char *ks_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *ks_version(void);

/*
 # Safety
 `s` must come from this library and not have been freed.
 */
void ks_string_free(char *s);

/*
 Moment tensor from `values` in row-major order over `degrees`, i.e.
 `prod(degrees[j] + 1)` values with `values[0] == 1`.

 # Safety
 `degrees` must hold `ndims` entries and `values` `nvalues` entries.
 */
enum KsStatus ks_moments_new(const uintptr_t *degrees,
                             uintptr_t ndims,
                             const double *values,
                             uintptr_t nvalues,
                             struct KsMoments **out);

/*
 # Safety
 `json` must be a NUL-terminated string.
 */
enum KsStatus ks_moments_from_json(const char *json, struct KsMoments **out);

/*
 # Safety
 `m` must be a live handle; `out_json` receives a string for
 [`ks_string_free`].
 */
enum KsStatus ks_moments_to_json(const struct KsMoments *m, char **out_json);

/*
 Number of stored values; `0` for NULL.

 # Safety
 `m` must be NULL or a live handle.
 */
uintptr_t ks_moments_len(const struct KsMoments *m);

/*
 Copies the values into `values`, which must hold [`ks_moments_len`] entries.

 # Safety
 `m` must be a live handle and `values` writable for `len` entries.
 */
enum KsStatus ks_moments_values(const struct KsMoments *m, double *values, uintptr_t len);

/*
 # Safety
 `m` must be NULL or a handle that has not been freed.
 */
void ks_moments_free(struct KsMoments *m);

/*
 Runs a loop program `replications` times for `iterations` steps and
 returns the sample moments of every output up to `degree`.

 # Safety
 `program` must be a NUL-terminated string.
 */
enum KsStatus ks_simulate_moments(const char *program,
                                  uint64_t iterations,
                                  uint64_t replications,
                                  uint64_t seed,
                                  uintptr_t degree,
                                  struct KsMoments **out);

/*
 Reference distribution from its JSON descriptor, e.g.
 `{"family":"uniform","support":[0,1]}`.

 # Safety
 `json` must be a NUL-terminated string.
 */
enum KsStatus ks_reference_from_json(const char *json, struct KsReference **out);

/*
 # Safety
 `r` must be NULL or a handle that has not been freed.
 */
void ks_reference_free(struct KsReference *r);

/*
 K-series fit with one reference per moment dimension.

 # Safety
 `references` must hold `nrefs` live handles.
 */
enum KsStatus ks_fit(const struct KsMoments *moments,
                     const struct KsReference *const *references,
                     uintptr_t nrefs,
                     struct KsEstimate **out);

/*
 Gram-Charlier fit of univariate moments.

 # Safety
 `moments` must be a live handle.
 */
enum KsStatus ks_fit_gram_charlier(const struct KsMoments *moments, struct KsEstimate **out);

/*
 # Safety
 `json` must be a NUL-terminated string.
 */
enum KsStatus ks_estimate_from_json(const char *json, struct KsEstimate **out);

/*
 # Safety
 `est` must be a live handle; `out_json` receives a string for
 [`ks_string_free`].
 */
enum KsStatus ks_estimate_to_json(const struct KsEstimate *est, char **out_json);

/*
 Number of variables; `0` for NULL.

 # Safety
 `est` must be NULL or a live handle.
 */
uintptr_t ks_estimate_dims(const struct KsEstimate *est);

/*
 Density at `npoints` points stored row-major in `points`
 (`npoints * dims` values). Points outside the support give 0.

 # Safety
 `points` must hold `npoints * dims` values and `out` `npoints` slots.
 */
enum KsStatus ks_estimate_eval(const struct KsEstimate *est,
                               const double *points,
                               uintptr_t npoints,
                               double *out);

/*
 Integral of the estimate over its support.

 # Safety
 `est` must be a live handle and `out` writable.
 */
enum KsStatus ks_estimate_normalization(const struct KsEstimate *est, double *out);

/*
 # Safety
 `est` must be NULL or a handle that has not been freed.
 */
void ks_estimate_free(struct KsEstimate *est);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KSERIES_H */
