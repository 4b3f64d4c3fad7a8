#ifndef GAVC_H
#define GAVC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GavcStatus {
  GAVC_STATUS_OK = 0,
  GAVC_STATUS_INVALID_PARAMETER = 1,
  GAVC_STATUS_INFEASIBLE = 2,
  GAVC_STATUS_DEGENERATE = 3,
  GAVC_STATUS_NUMERIC = 4,
  GAVC_STATUS_INVALID_SCHEDULE = 5,
  GAVC_STATUS_DIMENSION_MISMATCH = 6,
  GAVC_STATUS_NULL_POINTER = 7,
  GAVC_STATUS_PANIC = 8,
} GavcStatus;

typedef enum GavcJammer {
  GAVC_JAMMER_NONE = 0,
  GAVC_JAMMER_GAUSSIAN = 1,
  GAVC_JAMMER_SPHERE = 2,
  GAVC_JAMMER_SYMMETRIZE = 3,
  GAVC_JAMMER_ORTHOGONAL = 4,
  /**
   * Full-power push of the target message toward its nearest neighbour.
   */
  GAVC_JAMMER_FIXED = 5,
} GavcJammer;

/**
 * Opaque randomized code: a seeded codebook and its rotation keys.
 */
typedef struct GavcSimulator GavcSimulator;

typedef struct GavcDpcResult {
  /**
   * 1 if some design point clears the jammer.
   */
  int32_t feasible;
  double rate_bits;
  double alpha;
  double rho;
  double margin;
} GavcDpcResult;

typedef struct GavcTrialResult {
  uint64_t trials;
  uint64_t errors;
  double error_rate;
  double ci_low;
  double ci_high;
} GavcTrialResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into the library from the same thread.
 */
const char *gavc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gavc_version(void);

/**
 * Randomized-code capacity in bits per symbol.
 *
 * # Safety
 * `out_bits` must be null or point to writable memory.
 */
enum GavcStatus gavc_randomized_capacity(double gamma,
                                         double lambda,
                                         double sigma_w2,
                                         double *out_bits);

/**
 * Deterministic-code capacity in bits per symbol.
 *
 * # Safety
 * `out_bits` must be null or point to writable memory.
 */
enum GavcStatus gavc_deterministic_capacity(double gamma,
                                            double lambda,
                                            double sigma_w2,
                                            double *out_bits);

/**
 * Best dirty-paper rate over `(alpha, rho)`. An infeasible instance is not
 * an error: `feasible` is 0 and the rate is 0.
 *
 * # Safety
 * `out_result` must be null or point to writable memory.
 */
enum GavcStatus gavc_dpc_optimize(double gamma,
                                  double lambda,
                                  double sigma_w2,
                                  double sigma_t2,
                                  double grid_step,
                                  double refine_tol,
                                  struct GavcDpcResult *out_result);

/**
 * Max-min MIMO rate for diagonal noise `nu[0..m]`. The transmitter's power
 * split is written to `out_powers[0..m]` when that pointer is non-null.
 *
 * # Safety
 * `nu` must point to `m` readable doubles, `out_powers` to `m` writable
 * doubles or be null.
 */
enum GavcStatus gavc_mimo_maxmin(const double *nu,
                                 size_t m,
                                 double gamma,
                                 double lambda,
                                 double tol,
                                 double *out_rate_bits,
                                 double *out_powers);

/**
 * Draws a codebook of `codewords` points on the `sqrt(n gamma)` sphere and
 * `keys` rotations, all from `seed`. Free with `gavc_simulator_free`.
 *
 * # Safety
 * `out_sim` must be null or point to writable memory.
 */
enum GavcStatus gavc_simulator_new(size_t n,
                                   size_t codewords,
                                   size_t keys,
                                   double gamma,
                                   uint64_t seed,
                                   struct GavcSimulator **out_sim);

/**
 * Runs `trials` transmissions of uniformly drawn messages, or of message
 * `target` only when the jammer is `GAVC_JAMMER_FIXED`.
 *
 * # Safety
 * `sim` must come from `gavc_simulator_new` and not be freed;
 * `out_result` must be null or point to writable memory.
 */
enum GavcStatus gavc_simulator_run(const struct GavcSimulator *sim,
                                   enum GavcJammer jammer,
                                   double lambda,
                                   double sigma_w2,
                                   size_t target,
                                   uint64_t trials,
                                   uint64_t seed,
                                   struct GavcTrialResult *out_result);

/**
 * Number of codewords in the simulator's codebook; 0 for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
size_t gavc_simulator_codebook_size(const struct GavcSimulator *sim);

/**
 * Releases a simulator. Null is a no-op.
 *
 * # Safety
 * `sim` must be null or a handle from `gavc_simulator_new` not yet freed.
 */
void gavc_simulator_free(struct GavcSimulator *sim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAVC_H */
