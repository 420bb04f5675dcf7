#ifndef QUADTRAP_H
#define QUADTRAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Selects the delta of [`qt_params_published`].
 */
typedef enum QtDeltaSource {
  QT_DELTA_SOURCE_CAPTION = 0,
  QT_DELTA_SOURCE_TEXT = 1,
  QT_DELTA_SOURCE_COMPUTED = 2,
} QtDeltaSource;

typedef enum QtStatus {
  QT_STATUS_OK = 0,
  QT_STATUS_NULL_POINTER = 1,
  QT_STATUS_INVALID_ARGUMENT = 2,
  QT_STATUS_NUMERIC_FAILURE = 3,
  QT_STATUS_OUT_OF_RANGE = 4,
  QT_STATUS_PANIC = 5,
} QtStatus;

typedef struct QtParams QtParams;

typedef struct QtSection QtSection;

typedef struct QtTrajectory QtTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len - 1` bytes). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t qt_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qt_version(void);

/**
 * Published sigma with the selected delta.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QtStatus qt_params_published(enum QtDeltaSource source, struct QtParams **out);

/**
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QtStatus qt_params_raw(double sigma, double delta, struct QtParams **out);

/**
 * Writes sigma, delta and eta.
 *
 * # Safety
 * `p` must be a live handle; `out` must point to three doubles.
 */
enum QtStatus qt_params_values(const struct QtParams *p, double *out);

/**
 * # Safety
 * `p` must be null or a handle not yet freed.
 */
void qt_params_free(struct QtParams *p);

/**
 * Integrates the Cartesian state `(x, y, z, px, py, pz)` to `tau_end`.
 * Tolerances <= 0 select the defaults. On `NumericFailure` the partial
 * trajectory is still returned in `out`.
 *
 * # Safety
 * `p` must be a live handle, `state` must point to six doubles, `out` valid for writes.
 */
enum QtStatus qt_orbit_integrate(const struct QtParams *p,
                                 const double *state,
                                 double tau_end,
                                 double rel_tol,
                                 double abs_tol,
                                 struct QtTrajectory **out);

/**
 * Number of stored samples; 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t qt_trajectory_len(const struct QtTrajectory *t);

/**
 * Sample `i` as `(tau, r, z, p_r, p_z, phi, x, y, energy)`.
 *
 * # Safety
 * `t` must be a live handle; `out` must point to nine doubles.
 */
enum QtStatus qt_trajectory_sample(const struct QtTrajectory *t, size_t i, double *out);

/**
 * # Safety
 * `t` must be null or a handle not yet freed.
 */
void qt_trajectory_free(struct QtTrajectory *t);

/**
 * Section `z = 0, p_z > 0` of `n_seeds` default seeds, `n_crossings` each.
 *
 * # Safety
 * `p` must be a live handle; `out` valid for writes.
 */
enum QtStatus qt_section_compute(const struct QtParams *p,
                                 double h,
                                 double p_phi,
                                 size_t n_seeds,
                                 size_t n_crossings,
                                 struct QtSection **out);

/**
 * # Safety
 * `s` must be null or a live handle.
 */
size_t qt_section_seed_count(const struct QtSection *s);

/**
 * # Safety
 * `s` must be null or a live handle.
 */
size_t qt_section_point_count(const struct QtSection *s, size_t seed);

/**
 * Crossing `i` of seed `seed` as `(tau, r, p_r)`.
 *
 * # Safety
 * `s` must be a live handle; `out` must point to three doubles.
 */
enum QtStatus qt_section_point(const struct QtSection *s, size_t seed, size_t i, double *out);

/**
 * # Safety
 * `s` must be null or a handle not yet freed.
 */
void qt_section_free(struct QtSection *s);

/**
 * Closed-form `(z, z')` on the axis at rescaled energy `h_z` and time `t`.
 *
 * # Safety
 * `out` must point to two doubles.
 */
enum QtStatus qt_zaxis_state(double h_z, double t, double *out);

/**
 * Inner and outer turning radius of the rescaled planar problem.
 *
 * # Safety
 * `out` must point to two doubles.
 */
enum QtStatus qt_radial_turning_points(double h_r, double c_z, double *out);

/**
 * Morales-Ramis test for degree `k_num/k_den` and eigenvalues
 * `num[i]/den[i]`. `verdict` receives 1 for pass, 0 for fail; on fail the
 * witness eigenvalue is written to `witness_num/witness_den`.
 *
 * # Safety
 * `num` and `den` must point to `n` integers; the outputs must be valid for writes.
 */
enum QtStatus qt_galois_check(int64_t k_num,
                              int64_t k_den,
                              const int64_t *num,
                              const int64_t *den,
                              size_t n,
                              int *verdict,
                              int64_t *witness_num,
                              int64_t *witness_den);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUADTRAP_H */
