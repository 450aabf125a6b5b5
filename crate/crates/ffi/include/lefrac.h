#ifndef LEFRAC_H
#define LEFRAC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LefracStatus {
  LEFRAC_STATUS_OK = 0,
  LEFRAC_STATUS_NULL_POINTER = 1,
  /**
   * Argument outside the domain of the operation, or a usage error.
   */
  LEFRAC_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Malformed or invalid configuration JSON.
   */
  LEFRAC_STATUS_INVALID_CONFIG = 3,
  LEFRAC_STATUS_NON_FINITE = 4,
  LEFRAC_STATUS_SOLVER_DIVERGED = 5,
  LEFRAC_STATUS_BUFFER_TOO_SMALL = 6,
  /**
   * A panic or failed self-check inside the library.
   */
  LEFRAC_STATUS_INTERNAL = 7,
} LefracStatus;

/**
 * Opaque simulation handle.
 */
typedef struct LefracSim LefracSim;

typedef struct LefracParams {
  double a;
  double b;
  double sigma;
  double d1;
  double d2;
  /**
   * Fractional order in (0, 1].
   */
  double delta;
} LefracParams;

/**
 * Jacobian `[[f0, f1], [sigma*g0, sigma*g1]]` at the equilibrium.
 */
typedef struct LefracJacobian {
  double f0;
  double f1;
  double g0;
  double g1;
  double trace;
  double det;
} LefracJacobian;

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread; do not free.
 */
const char *lefrac_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void lefrac_string_free(char *s);

/**
 * # Safety
 * `result` must be valid for writes.
 */
enum LefracStatus lefrac_gamma(double x, double *result);

/**
 * L1 approximation of the Caputo derivative of order `delta` at the last of
 * `n` samples spaced `dt` apart.
 *
 * # Safety
 * `samples` must point to `n` readable values; `result` must be valid for writes.
 */
enum LefracStatus lefrac_caputo_l1(const double *samples,
                                   size_t n,
                                   double dt,
                                   double delta,
                                   double *result);

/**
 * # Safety
 * `p` must be readable; `u` and `v` valid for writes.
 */
enum LefracStatus lefrac_equilibrium(const struct LefracParams *p, double *u, double *v);

/**
 * # Safety
 * `p` must be readable; `result` valid for writes.
 */
enum LefracStatus lefrac_jacobian(const struct LefracParams *p, struct LefracJacobian *result);

/**
 * Order at which the kinetic equilibrium changes stability. `*exists` is
 * false when it is stable for every order, and `*order` is then untouched.
 *
 * # Safety
 * `p` must be readable; `order` and `exists` valid for writes.
 */
enum LefracStatus lefrac_critical_order(const struct LefracParams *p, double *order, bool *exists);

/**
 * Laplacian eigenvalue interval on which diffusion destabilizes the
 * equilibrium. `*exists` is false when there is none.
 *
 * # Safety
 * `p` must be readable; `lo`, `hi` and `exists` valid for writes.
 */
enum LefracStatus lefrac_turing_band(const struct LefracParams *p,
                                     double *lo,
                                     double *hi,
                                     bool *exists);

/**
 * Stability report for a JSON run configuration, as a JSON string that the
 * caller frees with `lefrac_string_free`.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `report_json` valid for writes.
 */
enum LefracStatus lefrac_analyze_json(const char *config_json, char **report_json);

/**
 * Builds a simulation from a JSON run configuration. `seed` overrides the
 * configured seed when not NULL.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string, `seed` NULL or readable,
 * `sim` valid for writes.
 */
enum LefracStatus lefrac_sim_new(const char *config_json,
                                 const uint64_t *seed,
                                 struct LefracSim **sim);

/**
 * Advances `steps` time steps.
 *
 * # Safety
 * `sim` must come from `lefrac_sim_new` and not have been freed.
 */
enum LefracStatus lefrac_sim_step(struct LefracSim *sim, size_t steps);

/**
 * # Safety
 * `sim` must be a live handle; `t`, `steps` and `nodes` valid for writes.
 */
enum LefracStatus lefrac_sim_info(const struct LefracSim *sim,
                                  double *t,
                                  size_t *steps,
                                  size_t *nodes);

/**
 * Copies the current fields (row-major, x fastest) into `u` and `v`, each of
 * capacity `len`.
 *
 * # Safety
 * `sim` must be a live handle; `u` and `v` must each have room for `len` values.
 */
enum LefracStatus lefrac_sim_copy_fields(const struct LefracSim *sim,
                                         double *u,
                                         double *v,
                                         size_t len);

/**
 * Releases a simulation. NULL is ignored.
 *
 * # Safety
 * `sim` must come from `lefrac_sim_new` and not have been freed.
 */
void lefrac_sim_free(struct LefracSim *sim);

#endif  /* LEFRAC_H */
