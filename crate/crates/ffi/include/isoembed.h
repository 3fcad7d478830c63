#ifndef ISOEMBED_H
#define ISOEMBED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IsoStatus {
  ISO_STATUS_OK = 0,
  ISO_STATUS_NULL_POINTER = 1,
  ISO_STATUS_INVALID_ARGUMENT = 2,
  ISO_STATUS_CONFIG = 3,
  ISO_STATUS_PRECONDITION = 4,
  ISO_STATUS_DOMAIN = 5,
  ISO_STATUS_CONVERGENCE = 6,
  ISO_STATUS_OBSTRUCTION = 7,
  ISO_STATUS_CHART_OVERFLOW = 8,
  ISO_STATUS_FRAME_DRIFT = 9,
  ISO_STATUS_DISCONNECTED = 10,
  ISO_STATUS_IO = 11,
  ISO_STATUS_PANIC = 12,
} IsoStatus;

typedef enum IsoChart {
  ISO_CHART_NORTH = 0,
  ISO_CHART_SOUTH = 1,
} IsoChart;

typedef enum IsoCommand {
  ISO_COMMAND_VERIFY = 0,
  ISO_COMMAND_SOLVE = 1,
  ISO_COMMAND_RECONSTRUCT = 2,
  ISO_COMMAND_FAMILY = 3,
} IsoCommand;

/**
 * Opaque surface family.
 */
typedef struct IsoFamily IsoFamily;

/**
 * Opaque run report.
 */
typedef struct IsoReport IsoReport;

typedef struct IsoConeReport {
  bool is_spd;
  bool member;
  double eps_gap;
} IsoConeReport;

/**
 * Scalar quantities at one surface point.
 */
typedef struct IsoPointValues {
  double mean_curvature;
  double scalar_curvature;
  double laplacian_scalar;
  double chi_norm;
  double ricci_norm;
  double sectional_min;
  double sectional_max;
  double support;
  double gauss_residual;
  double codazzi_residual;
  double support_residual;
} IsoPointValues;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *iso_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *iso_version(void);

/**
 * `σ_k(x)` for `x` of length `n`.
 *
 * # Safety
 * `x` must point to `n` readable doubles; `out` must be writable.
 */
enum IsoStatus iso_sigma(size_t k, const double *x, size_t n, double *out);

/**
 * `Φ(A) = tr(A)A − A²`.
 *
 * # Safety
 * `a` and `out` must each hold `n·n` doubles.
 */
enum IsoStatus iso_phi(const double *a, size_t n, double *out);

/**
 * The SPD solution of `Φ(A) = B`; fails with `Domain` when `B` is outside
 * the cone.
 *
 * # Safety
 * `b` and `out` must each hold `n·n` doubles.
 */
enum IsoStatus iso_phi_inverse(const double *b, size_t n, double tol, double *out);

/**
 * Cone membership and ε-gap of `B`.
 *
 * # Safety
 * `b` must hold `n·n` doubles; `out` must be writable.
 */
enum IsoStatus iso_cone_report(const double *b, size_t n, struct IsoConeReport *out);

/**
 * Round sphere of dimension 2 or 3.
 *
 * # Safety
 * `out` must be writable; the handle is released with [`iso_family_free`].
 */
enum IsoStatus iso_family_sphere(size_t dim, double radius, struct IsoFamily **out);

/**
 * Ellipsoid with `len` semi-axes, `len` = dimension + 1.
 *
 * # Safety
 * `axes` must hold `len` doubles; `out` must be writable.
 */
enum IsoStatus iso_family_ellipsoid(const double *axes, size_t len, struct IsoFamily **out);

/**
 * Family taken from the `[family]` table of a run configuration.
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string; `out` must be writable.
 */
enum IsoStatus iso_family_from_config(const char *config_toml, struct IsoFamily **out);

/**
 * # Safety
 * `family` must be null or a handle from this library, not yet freed.
 */
void iso_family_free(struct IsoFamily *family);

/**
 * # Safety
 * `family` must be a live handle.
 */
size_t iso_family_dim(const struct IsoFamily *family);

/**
 * Curvature quantities and identity residuals at chart coordinates
 * `coords` (length = family dimension).
 *
 * # Safety
 * `family` must be a live handle, `coords` must hold `len` doubles and
 * `out` must be writable.
 */
enum IsoStatus iso_family_evaluate(const struct IsoFamily *family,
                                   enum IsoChart chart,
                                   const double *coords,
                                   size_t len,
                                   struct IsoPointValues *out);

/**
 * Runs a command on a TOML configuration. Output paths named in the
 * configuration are written as by the command-line tool.
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string; `out` must be writable.
 * The handle is released with [`iso_report_free`].
 */
enum IsoStatus iso_run(enum IsoCommand command, const char *config_toml, struct IsoReport **out);

/**
 * # Safety
 * `report` must be null or a handle from [`iso_run`], not yet freed.
 */
void iso_report_free(struct IsoReport *report);

/**
 * Overall verdict of a report.
 *
 * # Safety
 * `report` must be a live handle.
 */
bool iso_report_pass(const struct IsoReport *report);

/**
 * # Safety
 * `report` must be a live handle.
 */
size_t iso_report_section_count(const struct IsoReport *report);

/**
 * JSON form of the report, owned by the handle.
 *
 * # Safety
 * `report` must be a live handle; the string lives as long as it does.
 */
const char *iso_report_json(const struct IsoReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISOEMBED_H */
