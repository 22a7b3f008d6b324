#ifndef PITUNE_H
#define PITUNE_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum PituneStatus {
  PITUNE_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  PITUNE_STATUS_NULL_POINTER = 1,
  /**
   * A numeric argument was out of range (non-positive, non-finite, bad range).
   */
  PITUNE_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The controller integral time does not cancel the slow plant pole.
   */
  PITUNE_STATUS_CANCELLATION_REQUIRED = 3,
  /**
   * The step response did not settle within the simulated horizon.
   */
  PITUNE_STATUS_NOT_SETTLED = 4,
  /**
   * The closed loop is unstable.
   */
  PITUNE_STATUS_UNSTABLE = 5,
  /**
   * A caller-supplied buffer is too small; the required length was written.
   */
  PITUNE_STATUS_BUFFER_TOO_SMALL = 6,
  /**
   * Any other numerical failure (root finding, crossover search, ...).
   */
  PITUNE_STATUS_NUMERICAL = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  PITUNE_STATUS_PANIC = 8,
} PituneStatus;

/**
 * Opaque plant handle.
 */
typedef struct PitunePlant PitunePlant;

/**
 * Opaque sampled step response handle.
 */
typedef struct PituneStepResponse PituneStepResponse;

/**
 * PI controller `C(s) = k (1 + 1/(ti s))`.
 */
typedef struct PituneController {
  double k;
  double ti;
} PituneController;

typedef struct PituneComplex {
  double re;
  double im;
} PituneComplex;

/**
 * Closed-loop poles (descending real part) and cancellation diagnostics.
 */
typedef struct PituneLoopReport {
  struct PituneComplex poles[3];
  bool cancellation_detected;
  double vieta_residuals[3];
} PituneLoopReport;

/**
 * Frequency-domain robustness: peak sensitivities, phase margin in degrees
 * and gain crossover frequency in rad/s.
 */
typedef struct PituneFreqMetrics {
  double ms;
  double mt;
  double pm_deg;
  double wgc;
} PituneFreqMetrics;

/**
 * Settling time in seconds, percent overshoot and monotonicity flag.
 */
typedef struct PituneStepMetrics {
  double ts;
  double po;
  bool monotonic;
} PituneStepMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns a static description of `status`. Never null.
 */
const char *pitune_status_message(enum PituneStatus status);

/**
 * Detailed message for the last failing call on this thread, or null if the
 * last call succeeded. Valid until the next pitune call on the same thread.
 */
const char *pitune_last_error_message(void);

/**
 * Creates the plant `kp / ((t1 s + 1)(t2 s + 1))`. The time constants are
 * reordered so that `t1 >= t2`.
 *
 * # Safety
 * `out` must be valid for writes. On success `*out` owns a handle that must
 * be released with [`pitune_plant_free`].
 */
enum PituneStatus pitune_plant_new(double kp, double t1, double t2, struct PitunePlant **out);

/**
 * Releases a plant handle. Null is a no-op.
 *
 * # Safety
 * `plant` must be null or a handle from [`pitune_plant_new`] not yet freed.
 */
void pitune_plant_free(struct PitunePlant *plant);

/**
 * Reads back the (ordered) plant parameters.
 *
 * # Safety
 * `plant` must be a live handle; the out-pointers must be valid for writes.
 */
enum PituneStatus pitune_plant_params(const struct PitunePlant *plant,
                                      double *kp,
                                      double *t1,
                                      double *t2);

/**
 * Critically damped PI tuning: `k = t1 / (4 kp t2)`, `ti = t1`.
 *
 * # Safety
 * `plant` must be a live handle; `out` must be valid for writes.
 */
enum PituneStatus pitune_tune(const struct PitunePlant *plant, struct PituneController *out);

/**
 * Damping ratio and natural frequency of the reduced loop. Requires
 * `ctrl.ti` to equal the plant's `t1`.
 *
 * # Safety
 * `plant` must be a live handle; `zeta` and `wn` must be valid for writes.
 */
enum PituneStatus pitune_damping(const struct PitunePlant *plant,
                                 struct PituneController ctrl,
                                 double *zeta,
                                 double *wn);

/**
 * Closed-loop poles and pole-zero cancellation check.
 *
 * # Safety
 * `plant` must be a live handle; `out` must be valid for writes.
 */
enum PituneStatus pitune_analyze(const struct PitunePlant *plant,
                                 struct PituneController ctrl,
                                 struct PituneLoopReport *out);

/**
 * Peak sensitivities, phase margin and gain crossover of the loop.
 *
 * # Safety
 * `plant` must be a live handle; `out` must be valid for writes.
 */
enum PituneStatus pitune_robustness(const struct PitunePlant *plant,
                                    struct PituneController ctrl,
                                    struct PituneFreqMetrics *out);

/**
 * Simulates the closed-loop unit step response with RK4. A non-positive
 * `horizon` selects the default horizon for the plant.
 *
 * # Safety
 * `plant` must be a live handle; `out` must be valid for writes. On success
 * `*out` owns a handle that must be released with
 * [`pitune_step_response_free`].
 */
enum PituneStatus pitune_simulate(const struct PitunePlant *plant,
                                  struct PituneController ctrl,
                                  double dt,
                                  double horizon,
                                  struct PituneStepResponse **out);

/**
 * Releases a step response handle. Null is a no-op.
 *
 * # Safety
 * `resp` must be null or a handle from [`pitune_simulate`] not yet freed.
 */
void pitune_step_response_free(struct PituneStepResponse *resp);

/**
 * Number of samples in the response (0 for a null handle).
 *
 * # Safety
 * `resp` must be null or a live handle.
 */
uintptr_t pitune_step_response_len(const struct PituneStepResponse *resp);

/**
 * Sample spacing in seconds (NaN for a null handle).
 *
 * # Safety
 * `resp` must be null or a live handle.
 */
double pitune_step_response_dt(const struct PituneStepResponse *resp);

/**
 * Copies the samples into `buf`. `*written` receives the number of samples;
 * if `capacity` is smaller than that, nothing is copied and
 * `PITUNE_STATUS_BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `resp` must be a live handle; `buf` must be valid for `capacity` writes
 * (it may be null when `capacity` is 0); `written` must be valid for writes.
 */
enum PituneStatus pitune_step_response_samples(const struct PituneStepResponse *resp,
                                               double *buf,
                                               uintptr_t capacity,
                                               uintptr_t *written);

/**
 * Settling time into `band`, percent overshoot and monotonicity.
 *
 * # Safety
 * `resp` must be a live handle; `out` must be valid for writes.
 */
enum PituneStatus pitune_step_metrics(const struct PituneStepResponse *resp,
                                      double band,
                                      struct PituneStepMetrics *out);

/**
 * Dimensionless settling constant: the tuned loop settles into `band` at
 * `2 t2` times this value.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PituneStatus pitune_settling_constant(double band, double *out);

/**
 * Exact step response of the tuned loop, `1 - (1 + t/(2 t2)) exp(-t/(2 t2))`.
 */
double pitune_analytic_step(double t2, double t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PITUNE_H */
