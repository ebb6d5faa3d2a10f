#ifndef EDGEWALL_H
#define EDGEWALL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Right continuation u(x) = u(x_max) for x > x_max.
 */
#define EW_RIGHT_RULE_CONSTANT_TAIL 0

/**
 * Right continuation u(x) = 0 for x > x_max.
 */
#define EW_RIGHT_RULE_ZERO 1

/**
 * Result code of every fallible call.
 */
typedef enum EwStatus {
  EW_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  EW_STATUS_NULL_POINTER = 1,
  /**
   * An argument is outside its domain.
   */
  EW_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A caller buffer is shorter than the data to copy.
   */
  EW_STATUS_BUFFER_TOO_SMALL = 3,
  /**
   * The relaxation diverged or became unstable.
   */
  EW_STATUS_NUMERICAL = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  EW_STATUS_INTERNAL = 5,
} EwStatus;

/**
 * Opaque grid on [0, x_max].
 */
typedef struct EwGrid EwGrid;

/**
 * Opaque profile θ sampled on a grid.
 */
typedef struct EwProfile EwProfile;

/**
 * Opaque outcome of a relaxation.
 */
typedef struct EwRelaxResult EwRelaxResult;

/**
 * Time-stepping settings. A non-positive `dt` selects min(0.05, h_min/(1 + ν)).
 */
typedef struct EwRelaxOptions {
  double dt;
  double tol;
  size_t max_steps;
} EwRelaxOptions;

typedef struct EwEnergy {
  double exchange;
  double anisotropy;
  double edge_charge_term;
  double gagliardo_j_theta;
  double gagliardo_j_eta;
  double total_renormalized;
} EwEnergy;

/**
 * Dimensionless scales; lengths in metres.
 */
typedef struct EwScales {
  double exchange_length_ell;
  double bloch_width_l;
  double nu;
  double delta;
} EwScales;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a
 * successful call that returns an [`EwStatus`].
 * The pointer stays valid until the next `ew_*` call on the same thread.
 */
const char *ew_last_error(void);

/**
 * # Safety
 * `out` must be writable.
 */
enum EwStatus ew_grid_uniform(double dx, double x_max, struct EwGrid **out);

/**
 * Spacing starts at `dx0` and grows by 1 + 1/`stretch_b` per cell up to `h_max`.
 *
 * # Safety
 * `out` must be writable.
 */
enum EwStatus ew_grid_stretched(double dx0,
                                double stretch_b,
                                double x_max,
                                double h_max,
                                struct EwGrid **out);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
size_t ew_grid_len(const struct EwGrid *grid);

/**
 * # Safety
 * `out` must hold `len` doubles.
 */
enum EwStatus ew_grid_nodes(const struct EwGrid *grid, double *out, size_t len);

/**
 * # Safety
 * `grid` must be null or a handle not yet freed.
 */
void ew_grid_free(struct EwGrid *grid);

/**
 * θ(x) = 2β/(1 + e^{x/2}).
 *
 * # Safety
 * `grid` must be live and `out` writable.
 */
enum EwStatus ew_profile_initial(const struct EwGrid *grid, double beta, struct EwProfile **out);

/**
 * θ(x) = 2 arctan(e^{−x} tan(β/2)), for |β| < π.
 *
 * # Safety
 * `grid` must be live and `out` writable.
 */
enum EwStatus ew_profile_analytic(const struct EwGrid *grid, double beta, struct EwProfile **out);

/**
 * Profile from one θ sample per node; the edge angle is `theta[0]`.
 *
 * # Safety
 * `grid` must be live, `theta` must hold `len` doubles and `out` be writable.
 */
enum EwStatus ew_profile_from_samples(const struct EwGrid *grid,
                                      const double *theta,
                                      size_t len,
                                      struct EwProfile **out);

/**
 * # Safety
 * `profile` must be null or live.
 */
size_t ew_profile_len(const struct EwProfile *profile);

/**
 * # Safety
 * `out` must hold `len` doubles.
 */
enum EwStatus ew_profile_theta(const struct EwProfile *profile, double *out, size_t len);

/**
 * # Safety
 * `profile` must be null or a handle not yet freed.
 */
void ew_profile_free(struct EwProfile *profile);

struct EwRelaxOptions ew_relax_options_default(void);

/**
 * Relaxes `initial` at thin-film parameter `nu`. A run that stops at
 * `max_steps` still succeeds; check [`ew_result_converged`].
 *
 * # Safety
 * `initial` and `options` must be live, `out` writable.
 */
enum EwStatus ew_relax(const struct EwProfile *initial,
                       double nu,
                       const struct EwRelaxOptions *options,
                       struct EwRelaxResult **out);

/**
 * # Safety
 * `result` must be null or live.
 */
bool ew_result_converged(const struct EwRelaxResult *result);

/**
 * # Safety
 * `result` must be null or live.
 */
size_t ew_result_steps(const struct EwRelaxResult *result);

/**
 * Final residual sup-norm, NaN for a null handle.
 *
 * # Safety
 * `result` must be null or live.
 */
double ew_result_residual(const struct EwRelaxResult *result);

/**
 * # Safety
 * `result` must be live and `out` writable.
 */
enum EwStatus ew_result_energy(const struct EwRelaxResult *result, struct EwEnergy *out);

/**
 * Copies the relaxed profile into a new handle.
 *
 * # Safety
 * `result` must be live and `out` writable.
 */
enum EwStatus ew_result_profile(const struct EwRelaxResult *result, struct EwProfile **out);

/**
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void ew_result_free(struct EwRelaxResult *result);

/**
 * Renormalized energy of a profile with the default cutoff.
 *
 * # Safety
 * `profile` must be live and `out` writable.
 */
enum EwStatus ew_energy(const struct EwProfile *profile, double nu, struct EwEnergy *out);

/**
 * Scales from Ms (A/m), A (J/m), K (J/m³) and thickness d (m).
 *
 * # Safety
 * `out` must be writable.
 */
enum EwStatus ew_scales(double ms, double a, double k, double d, struct EwScales *out);

/**
 * (−d²/dx²)^{1/2}u at every node, with u = `left_value` for x < 0 and the
 * right continuation given by `rule` (an `EW_RIGHT_RULE_*` value). `u[0]` must equal `left_value`.
 *
 * # Safety
 * `u` and `out` must each hold `len` doubles.
 */
enum EwStatus ew_half_laplacian(const struct EwGrid *grid,
                                const double *u,
                                size_t len,
                                double left_value,
                                uint32_t rule,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EDGEWALL_H */
