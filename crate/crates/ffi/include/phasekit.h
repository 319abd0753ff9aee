#ifndef PHASEKIT_H
#define PHASEKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PhasekitExtremumKind {
  PHASEKIT_EXTREMUM_KIND_MINIMUM = 0,
  PHASEKIT_EXTREMUM_KIND_MAXIMUM = 1,
  PHASEKIT_EXTREMUM_KIND_FLAT = 2,
  PHASEKIT_EXTREMUM_KIND_NON_EXTREMAL = 3,
} PhasekitExtremumKind;

typedef enum PhasekitStatus {
  PHASEKIT_STATUS_OK = 0,
  PHASEKIT_STATUS_INVALID_INPUT = 1,
  PHASEKIT_STATUS_UNSUPPORTED = 2,
  PHASEKIT_STATUS_MODE_CAP_EXCEEDED = 3,
  PHASEKIT_STATUS_RESOLUTION = 4,
  PHASEKIT_STATUS_DEGENERATE_PROJECTION = 5,
  PHASEKIT_STATUS_CONVERGENCE = 6,
  PHASEKIT_STATUS_NULL_POINTER = 7,
  PHASEKIT_STATUS_PANIC = 8,
} PhasekitStatus;

/**
 * Opaque phase density, either from a wavefunction or piecewise constant.
 */
typedef struct PhasekitDensity PhasekitDensity;

/**
 * Opaque normalized mode expansion.
 */
typedef struct PhasekitState PhasekitState;

typedef struct PhasekitWindowedStats {
  double alpha;
  double mean;
  double variance;
  double edge_density;
  /**
   * A `PhasekitExtremumKind` value.
   */
  int32_t kind;
} PhasekitWindowedStats;

typedef struct PhasekitUncertainty {
  double alpha0;
  double delta_theta;
  double variance;
  double edge_density_at_min;
  size_t n_extrema_found;
} PhasekitUncertainty;

typedef struct PhasekitRelation {
  double alpha;
  double delta_l;
  double delta_theta;
  double lhs;
  double rhs;
  double margin;
  bool satisfied;
  bool at_global_min;
} PhasekitRelation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *phasekit_version(void);

/**
 * Message of the last failing call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *phasekit_last_error(void);

/**
 * State with coefficients `re[i] + i im[i]` on modes `l_min + i`,
 * normalized on construction. `im` may be NULL for real coefficients.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `n` readable doubles; `out`
 * must be writable.
 */
enum PhasekitStatus phasekit_state_from_coeffs(int64_t l_min,
                                               const double *re,
                                               const double *im,
                                               size_t n,
                                               struct PhasekitState **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum PhasekitStatus phasekit_state_number(int64_t l, struct PhasekitState **out);

/**
 * Poisson-kernel packet of width `epsilon` centered at `beta`. A
 * non-positive `tail_tol` selects the default truncation.
 *
 * # Safety
 * `out` must be writable.
 */
enum PhasekitStatus phasekit_state_wavepacket(double epsilon,
                                              double beta,
                                              double tail_tol,
                                              struct PhasekitState **out);

/**
 * `cos γ e^{ilθ} + sin γ e^{-iβ} e^{iLθ}`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PhasekitStatus phasekit_state_two_mode(int64_t l,
                                            int64_t big_l,
                                            double gamma,
                                            double beta,
                                            struct PhasekitState **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum PhasekitStatus phasekit_state_coherent_phase(double zeta_re,
                                                  double zeta_im,
                                                  double tail_tol,
                                                  struct PhasekitState **out);

/**
 * Oscillator coherent state with amplitude `r` and phase `β`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PhasekitStatus phasekit_state_coherent(double r,
                                            double beta,
                                            double tail_tol,
                                            struct PhasekitState **out);

/**
 * # Safety
 * `state` must be NULL or a handle from this library not yet freed.
 */
void phasekit_state_free(struct PhasekitState *state);

/**
 * # Safety
 * `state` must be a live handle; `l_min` and `len` must be writable.
 */
enum PhasekitStatus phasekit_state_shape(const struct PhasekitState *state,
                                         int64_t *l_min,
                                         size_t *len);

/**
 * Copies up to `cap` coefficients into `re` and `im`.
 *
 * # Safety
 * `state` must be a live handle; `re` and `im` must hold `cap` doubles.
 */
enum PhasekitStatus phasekit_state_coeffs(const struct PhasekitState *state,
                                          double *re,
                                          double *im,
                                          size_t cap);

/**
 * # Safety
 * `state` must be a live handle; `mean` and `std` must be writable.
 */
enum PhasekitStatus phasekit_state_momentum(const struct PhasekitState *state,
                                            double *mean,
                                            double *std);

/**
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum PhasekitStatus phasekit_state_windowed_stats(const struct PhasekitState *state,
                                                  double alpha,
                                                  struct PhasekitWindowedStats *out);

/**
 * Window-minimized uncertainty with `grid_n` origins for bracketing.
 *
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum PhasekitStatus phasekit_state_uncertainty(const struct PhasekitState *state,
                                               size_t grid_n,
                                               struct PhasekitUncertainty *out);

/**
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum PhasekitStatus phasekit_relation_at(const struct PhasekitState *state,
                                         double alpha,
                                         struct PhasekitRelation *out);

/**
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum PhasekitStatus phasekit_relation_min(const struct PhasekitState *state,
                                          size_t grid_n,
                                          struct PhasekitRelation *out);

/**
 * Two opposite flat packets of width `delta` centred on `±π/2`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PhasekitStatus phasekit_density_two_peak(double delta, struct PhasekitDensity **out);

/**
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum PhasekitStatus phasekit_density_from_state(const struct PhasekitState *state,
                                                struct PhasekitDensity **out);

/**
 * # Safety
 * `density` must be NULL or a handle from this library not yet freed.
 */
void phasekit_density_free(struct PhasekitDensity *density);

/**
 * `ρ(θ)`.
 *
 * # Safety
 * `density` must be a live handle; `out` must be writable.
 */
enum PhasekitStatus phasekit_density_eval(const struct PhasekitDensity *density,
                                          double theta,
                                          double *out);

/**
 * # Safety
 * `density` must be a live handle; `out` must be writable.
 */
enum PhasekitStatus phasekit_density_windowed_stats(const struct PhasekitDensity *density,
                                                    double alpha,
                                                    struct PhasekitWindowedStats *out);

/**
 * # Safety
 * `density` must be a live handle; `out` must be writable.
 */
enum PhasekitStatus phasekit_density_uncertainty(const struct PhasekitDensity *density,
                                                 size_t grid_n,
                                                 struct PhasekitUncertainty *out);

/**
 * Poisson kernel at width `epsilon`, normalized against dθ/2π.
 *
 * # Safety
 * `out` must be writable.
 */
enum PhasekitStatus phasekit_poisson_kernel(double theta, double epsilon, double *out);

/**
 * Damped `Σ 2 sin(nθ)`, which tends to `cot(θ/2)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PhasekitStatus phasekit_sine_cot_sum(double theta, double epsilon, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHASEKIT_H */
