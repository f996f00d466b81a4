#ifndef SWIPT_NOMA_H
#define SWIPT_NOMA_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Return code of every fallible call.
typedef enum SwiptStatus {
  SWIPT_STATUS_OK = 0,
  SWIPT_STATUS_NULL_POINTER = 1,
  SWIPT_STATUS_INVALID_ARGUMENT = 2,
  SWIPT_STATUS_DIMENSION_MISMATCH = 3,
  SWIPT_STATUS_SOLVER_ERROR = 4,
  SWIPT_STATUS_PANIC = 5,
} SwiptStatus;

// Outcome of a solve, read back with [`swipt_solution_status`].
typedef enum SwiptSolveStatus {
  SWIPT_SOLVE_STATUS_OPTIMAL = 0,
  SWIPT_SOLVE_STATUS_STATIONARY = 1,
  SWIPT_SOLVE_STATUS_INFEASIBLE = 2,
  SWIPT_SOLVE_STATUS_MAX_ITER = 3,
} SwiptSolveStatus;

// Opaque channel instance.
typedef struct SwiptInstance SwiptInstance;

// Opaque solver result.
typedef struct SwiptSolution SwiptSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last error on this thread, or NULL. Valid until the next
// call into the library from the same thread.
const char *swipt_last_error(void);

// Single-antenna instance from normalized gains.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum SwiptStatus swipt_instance_new_siso(double h1,
                                         double h2,
                                         double g,
                                         struct SwiptInstance **out);

// Multi-antenna instance from normalized channel vectors given as separate
// real and imaginary arrays of length `n`.
//
// # Safety
// The four arrays must hold `n` readable doubles each; `out` as above.
enum SwiptStatus swipt_instance_new_miso(size_t n,
                                         const double *h1_re,
                                         const double *h1_im,
                                         const double *h2_re,
                                         const double *h2_im,
                                         double g,
                                         struct SwiptInstance **out);

// Draws an instance from the default channel model with `antennas` transmit
// antennas at `transmit_power_dbm`. The same `(seed, trial)` always gives
// the same instance.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum SwiptStatus swipt_instance_sample(uint64_t seed,
                                       uint64_t trial,
                                       size_t antennas,
                                       double transmit_power_dbm,
                                       struct SwiptInstance **out);

// Number of transmit antennas, or 0 for a NULL handle.
//
// # Safety
// `inst` must be NULL or a live handle.
size_t swipt_instance_antennas(const struct SwiptInstance *inst);

// Squared channel norms `‖h1‖²`, `‖h2‖²` and the relay gain.
//
// # Safety
// `inst` must be a live handle; the outputs must be writable.
enum SwiptStatus swipt_instance_gains(const struct SwiptInstance *inst,
                                      double *h1,
                                      double *h2,
                                      double *g);

// # Safety
// `inst` must be NULL or a handle not yet freed.
void swipt_instance_free(struct SwiptInstance *inst);

// Golden-section search on a single-antenna instance. `eps <= 0` selects
// the default bracket tolerance.
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
enum SwiptStatus swipt_solve_siso(const struct SwiptInstance *inst,
                                  double gamma1,
                                  double eps,
                                  struct SwiptSolution **out);

// Successive convex approximation. `eps <= 0` and `max_iter == 0` select
// the defaults.
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
enum SwiptStatus swipt_solve_sca(const struct SwiptInstance *inst,
                                 double gamma1,
                                 double eps,
                                 size_t max_iter,
                                 struct SwiptSolution **out);

// Exhaustive search over a `grid × grid` lattice of `(β, x)`. `grid == 0`
// selects the default.
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
enum SwiptStatus swipt_solve_exhaustive(const struct SwiptInstance *inst,
                                        double gamma1,
                                        size_t grid,
                                        struct SwiptSolution **out);

// Infeasible for a NULL handle.
//
// # Safety
// `sol` must be NULL or a live handle.
enum SwiptSolveStatus swipt_solution_status(const struct SwiptSolution *sol);

// Power-splitting ratio at user 2. NaN for a NULL handle.
//
// # Safety
// `sol` must be NULL or a live handle.
double swipt_solution_beta(const struct SwiptSolution *sol);

// Power fraction of user 1; NaN for multi-antenna solutions.
//
// # Safety
// `sol` must be NULL or a live handle.
double swipt_solution_alpha(const struct SwiptSolution *sol);

// SNR of user 2.
//
// # Safety
// `sol` must be NULL or a live handle.
double swipt_solution_objective(const struct SwiptSolution *sol);

// # Safety
// `sol` must be NULL or a live handle.
size_t swipt_solution_iterations(const struct SwiptSolution *sol);

// Copies both beamformers into caller arrays of length `n`, which must equal
// the antenna count.
//
// # Safety
// `sol` must be a live handle and the four arrays writable for `n` doubles.
enum SwiptStatus swipt_solution_beamformers(const struct SwiptSolution *sol,
                                            size_t n,
                                            double *w1_re,
                                            double *w1_im,
                                            double *w2_re,
                                            double *w2_im);

// # Safety
// `sol` must be NULL or a handle not yet freed.
void swipt_solution_free(struct SwiptSolution *sol);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWIPT_NOMA_H */
