#ifndef POPREC_H
#define POPREC_H

/* Generated by cbindgen from the poprec-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum PoprecStatus {
  PoprecStatus_Ok = 0,
  PoprecStatus_NullPointer = 1,
  PoprecStatus_InvalidArgument = 2,
  PoprecStatus_SolverFailure = 3,
  PoprecStatus_Infeasible = 4,
  PoprecStatus_BufferTooSmall = 5,
} PoprecStatus;

/**
 * Channel selector: 0 = lossy (erasure), 1 = noisy (bit flip).
 */
typedef enum PoprecModel {
  PoprecModel_Lossy = 0,
  PoprecModel_Noisy = 1,
} PoprecModel;

/**
 * Opaque weight-transition matrix handle.
 */
typedef struct PoprecPhi PoprecPhi;

/**
 * Opaque synthesized-estimator handle.
 */
typedef struct PoprecSynthesis PoprecSynthesis;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *poprec_status_message(enum PoprecStatus status);

/**
 * Build the `(d+1) x (d+1)` transition matrix for the given channel.
 *
 * # Safety
 * `out` must be a valid pointer; on `Ok` it receives a handle that must be
 * released with [`poprec_phi_free`].
 */
enum PoprecStatus poprec_phi_new(enum PoprecModel model,
                                 double eps,
                                 uintptr_t d,
                                 struct PoprecPhi **out);

/**
 * Release a transition-matrix handle. Null is ignored.
 *
 * # Safety
 * `phi` must be null or a pointer from [`poprec_phi_new`], not yet freed.
 */
void poprec_phi_free(struct PoprecPhi *phi);

/**
 * Dimension `d` of the handle (the matrix is `(d+1) x (d+1)`).
 *
 * # Safety
 * `phi` must be a live handle.
 */
uintptr_t poprec_phi_dim(const struct PoprecPhi *phi);

/**
 * Entry `Phi[i][j]` (output weight `i`, input weight `j`).
 *
 * # Safety
 * `phi` must be a live handle and `out` a valid pointer.
 */
enum PoprecStatus poprec_phi_entry(const struct PoprecPhi *phi,
                                   uintptr_t i,
                                   uintptr_t j,
                                   double *out);

/**
 * Dual LP value `delta(t)` for the functional `pi(0)`; `centered` adds the
 * `<Delta, 1> = 0` constraint.
 *
 * # Safety
 * `phi` must be a live handle and `out` a valid pointer.
 */
enum PoprecStatus poprec_delta_of_t(const struct PoprecPhi *phi,
                                    double t,
                                    bool centered,
                                    double *out);

/**
 * Min-TV LP value `t(delta)`.
 *
 * # Safety
 * `phi` must be a live handle and `out` a valid pointer.
 */
enum PoprecStatus poprec_t_of_delta(const struct PoprecPhi *phi, double delta, double *out);

/**
 * Minimax risk bracket `((1/64) delta(1/n)^2, delta(1/sqrt n)^2)`.
 *
 * # Safety
 * `phi` must be a live handle; `lower` and `upper` must be valid pointers.
 */
enum PoprecStatus poprec_risk_bounds(const struct PoprecPhi *phi,
                                     uint64_t n,
                                     double *lower,
                                     double *upper);

/**
 * Synthesize the minimax estimator for `P_0` at sample size `n`.
 *
 * # Safety
 * `phi` must be a live handle; on `Ok`, `out` receives a handle to free
 * with [`poprec_synthesis_free`].
 */
enum PoprecStatus poprec_synthesize(const struct PoprecPhi *phi,
                                    uint64_t n,
                                    struct PoprecSynthesis **out);

/**
 * Release a synthesis handle. Null is ignored.
 *
 * # Safety
 * `s` must be null or a pointer from [`poprec_synthesize`], not yet freed.
 */
void poprec_synthesis_free(struct PoprecSynthesis *s);

/**
 * Objective value, bias bound and sup norm of a synthesis.
 *
 * # Safety
 * `s` must be a live handle; out-pointers must be valid.
 */
enum PoprecStatus poprec_synthesis_stats(const struct PoprecSynthesis *s,
                                         double *value,
                                         double *bias_bound,
                                         double *sup_norm);

/**
 * Number of coefficients (`d + 1`).
 *
 * # Safety
 * `s` must be a live handle.
 */
uintptr_t poprec_synthesis_len(const struct PoprecSynthesis *s);

/**
 * Copy the coefficient vector into `buf` (capacity `len`).
 *
 * # Safety
 * `s` must be a live handle; `buf` must point to at least `len` doubles.
 */
enum PoprecStatus poprec_synthesis_coefficients(const struct PoprecSynthesis *s,
                                                double *buf,
                                                uintptr_t len);

/**
 * Unbiased lossy coefficients `g_j = (-eps/(1-eps))^j` into `buf`.
 *
 * # Safety
 * `buf` must point to at least `len >= d + 1` doubles.
 */
enum PoprecStatus poprec_unbiased_coefficients(uintptr_t d, double eps, double *buf, uintptr_t len);

/**
 * Apply a linear estimator to a weight histogram: `(1/n) sum g_j counts_j`.
 *
 * # Safety
 * `g` and `counts` must point to `len` readable elements; `out` must be
 * valid.
 */
enum PoprecStatus poprec_apply_estimator(const double *g,
                                         const uint64_t *counts,
                                         uintptr_t len,
                                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POPREC_H */
