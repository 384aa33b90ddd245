#ifndef BIOASSAY_H
#define BIOASSAY_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BioassayStatus {
  BIOASSAY_STATUS_OK = 0,
  BIOASSAY_STATUS_NULL_POINTER = 1,
  BIOASSAY_STATUS_INVALID_ARGUMENT = 2,
  BIOASSAY_STATUS_UNKNOWN_MODEL = 3,
  BIOASSAY_STATUS_ARITY = 4,
  BIOASSAY_STATUS_DOMAIN = 5,
  BIOASSAY_STATUS_NOT_DIFFERENTIABLE = 6,
  BIOASSAY_STATUS_UNATTAINABLE = 7,
  BIOASSAY_STATUS_NON_FINITE = 8,
  BIOASSAY_STATUS_SINGULAR = 9,
  BIOASSAY_STATUS_NON_CONVERGENCE = 10,
  BIOASSAY_STATUS_BUFFER_TOO_SMALL = 11,
  BIOASSAY_STATUS_INTERNAL = 12,
} BioassayStatus;

// Risk scale for [`bioassay_percentile`].
typedef enum BioassayRisk {
  // Extra risk when `F(0) > 0`, total risk otherwise.
  BIOASSAY_RISK_DEFAULT = 0,
  BIOASSAY_RISK_TOTAL = 1,
  BIOASSAY_RISK_EXTRA = 2,
} BioassayRisk;

// Opaque handle to a fit result.
typedef struct BioassayFit BioassayFit;

// Opaque handle to a registry model.
typedef struct BioassayModel BioassayModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *bioassay_version(void);

// Message for the last failed call on this thread; empty after success.
// Valid until the next call into the library on this thread.
const char *bioassay_last_error_message(void);

// Looks up a model by id.
//
// # Safety
// `id` must be a NUL-terminated string; `out` must be writable.
enum BioassayStatus bioassay_model_new(const char *id, struct BioassayModel **out);

// Releases a model handle; null is ignored.
//
// # Safety
// `model` must come from [`bioassay_model_new`] and not be freed twice.
void bioassay_model_free(struct BioassayModel *model);

// Minimum number of parameters (the exact count for fixed-arity models).
//
// # Safety
// `model` must be a live handle; `out` must be writable.
enum BioassayStatus bioassay_model_arity(const struct BioassayModel *model, size_t *out);

// `f(u, θ)`. `u2` is read only by two-input models.
//
// # Safety
// `theta` must hold `n_theta` values; `out` must be writable.
enum BioassayStatus bioassay_model_evaluate(const struct BioassayModel *model,
                                            double u,
                                            double u2,
                                            const double *theta,
                                            size_t n_theta,
                                            double *out);

// `∇_θ f(u, θ)` written to `out[0..n_theta]`.
//
// # Safety
// `theta` must hold `n_theta` values and `out` have room for `out_len`.
enum BioassayStatus bioassay_model_gradient(const struct BioassayModel *model,
                                            double u,
                                            double u2,
                                            const double *theta,
                                            size_t n_theta,
                                            double *out,
                                            size_t out_len);

// Total Fisher information `Σ ∇f∇fᵀ / σ²` over a design, row-major into
// `out[0..n_theta²]`. `design_u2` may be null for scalar-input models.
//
// # Safety
// Arrays must hold the stated number of values.
enum BioassayStatus bioassay_total_info(const struct BioassayModel *model,
                                        const double *design_u,
                                        const double *design_u2,
                                        size_t n_design,
                                        const double *theta,
                                        size_t n_theta,
                                        double sigma2,
                                        double *out,
                                        size_t out_len);

// Dose `L_p` at which a dose-response CDF reaches risk `p`.
//
// # Safety
// `theta` must hold `n_theta` values; `out` must be writable.
enum BioassayStatus bioassay_percentile(const struct BioassayModel *model,
                                        const double *theta,
                                        size_t n_theta,
                                        double p,
                                        enum BioassayRisk risk,
                                        double *out);

// Relative efficiency `(1 − ρ₁₂²)/(1 − ρ²_{Y2.1})`.
//
// # Safety
// `out` must be writable.
enum BioassayStatus bioassay_efficiency(double rho12, double rho_y2_1, double *out);

// Censored Weibull MLE. `events[i]` is nonzero for an observed event.
//
// # Safety
// `times` and `events` must hold `n` values; `out` must be writable.
enum BioassayStatus bioassay_weibull_mle(const double *times,
                                         const uint8_t *events,
                                         size_t n,
                                         struct BioassayFit **out);

// Releases a fit handle; null is ignored.
//
// # Safety
// `fit` must come from this library and not be freed twice.
void bioassay_fit_free(struct BioassayFit *fit);

// Number of estimated parameters, or 0 for a null handle.
//
// # Safety
// `fit` must be null or a live handle.
size_t bioassay_fit_param_count(const struct BioassayFit *fit);

// Copies the estimates into `out[0..len]`.
//
// # Safety
// `out` must have room for `out_len` values.
enum BioassayStatus bioassay_fit_params(const struct BioassayFit *fit, double *out, size_t out_len);

// 1 if the fit converged, 0 if not, -1 for a null handle.
//
// # Safety
// `fit` must be null or a live handle.
int bioassay_fit_converged(const struct BioassayFit *fit);

// Objective at the estimate (log-likelihood or SSE); NaN for null.
//
// # Safety
// `fit` must be null or a live handle.
double bioassay_fit_objective(const struct BioassayFit *fit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIOASSAY_H */
