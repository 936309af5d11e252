#ifndef ASSIMDYN_H
#define ASSIMDYN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Origin of a steady state. `A`..`I2` are open-economy cases; the `CLOSED`
 * variants are the natives-only states at `q = 0`, `q = 1` and `q = q*`.
 */
typedef enum AdCase {
  AD_CASE_A,
  AD_CASE_B,
  AD_CASE_C,
  AD_CASE_D,
  AD_CASE_E,
  AD_CASE_F,
  AD_CASE_G,
  AD_CASE_H,
  AD_CASE_I1,
  AD_CASE_I2,
  AD_CASE_CLOSED0,
  AD_CASE_CLOSED1,
  AD_CASE_CLOSED_INTERIOR,
  /**
   * No steady state, e.g. an integration that did not settle.
   */
  AD_CASE_NONE,
} AdCase;

typedef enum AdStability {
  AD_STABILITY_STABLE,
  AD_STABILITY_UNSTABLE,
  AD_STABILITY_MARGINAL,
} AdStability;

/**
 * Result of every fallible call.
 */
typedef enum AdStatus {
  AD_STATUS_OK = 0,
  AD_STATUS_NULL_POINTER = 1,
  /**
   * The parameter document could not be parsed.
   */
  AD_STATUS_PARSE = 2,
  /**
   * The parameters fail an admissibility check.
   */
  AD_STATUS_INADMISSIBLE = 3,
  /**
   * An argument lies outside its domain.
   */
  AD_STATUS_DOMAIN = 4,
  AD_STATUS_NON_FINITE = 5,
  /**
   * A model assumption failed during evaluation.
   */
  AD_STATUS_ASSUMPTION = 6,
  /**
   * The requested integration exceeds the step budget.
   */
  AD_STATUS_BUDGET = 7,
  /**
   * Index past the end of a list.
   */
  AD_STATUS_INDEX = 8,
  /**
   * An internal panic was caught.
   */
  AD_STATUS_PANIC = 9,
} AdStatus;

/**
 * Opaque model handle: parameters that passed validation or were forced.
 */
typedef struct AdModel AdModel;

/**
 * Opaque list of steady states.
 */
typedef struct AdSteadyStates AdSteadyStates;

/**
 * Economic parameters. `n` scales welfare only; `allowance` is `A`.
 */
typedef struct AdParams {
  double i_hs;
  double i_ls;
  double i_a;
  double i_na;
  double i_e;
  double c_hs;
  double c_a;
  double beta;
  double m;
  double n;
  double allowance;
} AdParams;

typedef struct AdThresholds {
  double q_star;
  double q_star2;
  double p_star;
  double p_star2;
  double a_star;
  double a_star2;
  double ca_bar;
} AdThresholds;

typedef struct AdSteadyState {
  double p;
  double q;
  enum AdCase case_label;
  bool in_domain;
  enum AdStability stability;
  /**
   * Number of valid entries in `eig_re` and `eig_im` (1 or 2).
   */
  size_t eig_count;
  double eig_re[2];
  double eig_im[2];
} AdSteadyState;

typedef struct AdTerminal {
  double p;
  double q;
  uint64_t steps;
  /**
   * Steady state the trajectory settled at, or `AD_CASE_NONE`.
   */
  enum AdCase converged_to;
  double max_clamp;
} AdTerminal;

typedef struct AdWelfare {
  /**
   * False when `A* <= 0` and no allowance is needed; the policy fields
   * are then NaN and the flags false.
   */
  bool evaluated;
  double sw_natives_baseline;
  double sw_migrants_baseline;
  double sw_natives_policy;
  double sw_migrants_policy;
  double ca_threshold_rhs;
  bool natives_better_off;
  bool migrants_better_off;
  bool cost_condition_holds;
} AdWelfare;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ad_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ad_version(void);

/**
 * Parameters of the built-in worked example.
 */
struct AdParams ad_params_example(void);

/**
 * Validates `params` and creates a model. With `force`, parameters that
 * fail validation are accepted anyway; results are then unsupported.
 *
 * # Safety
 * `params` must point to a valid `AdParams`; `out` must be writable.
 */
enum AdStatus ad_model_new(const struct AdParams *params, bool force, struct AdModel **out);

/**
 * Parses a JSON parameter document and creates a model.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum AdStatus ad_model_from_json(const char *json, bool force, struct AdModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must come from `ad_model_new`/`ad_model_from_json` and not have
 * been freed.
 */
void ad_model_free(struct AdModel *model);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum AdStatus ad_model_params(const struct AdModel *model, struct AdParams *out);

/**
 * Whether the model bypassed validation.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
bool ad_model_is_forced(const struct AdModel *model);

/**
 * Changes the allowance `A`, re-validating. On failure the model is left
 * unchanged.
 *
 * # Safety
 * `model` must be a live handle.
 */
enum AdStatus ad_model_set_allowance(struct AdModel *model, double allowance);

/**
 * Runs every admissibility check. `passed` receives the overall verdict and
 * `failed`, when not null, the number of failed checks.
 *
 * # Safety
 * `params` must point to a valid `AdParams`; `passed` must be writable;
 * `failed` may be null.
 */
enum AdStatus ad_validate(const struct AdParams *params, bool closed, bool *passed, size_t *failed);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum AdStatus ad_thresholds(const struct AdModel *model, struct AdThresholds *out);

/**
 * Replicator right-hand side of the open economy at `(p, q)`.
 *
 * # Safety
 * `model` must be a live handle; `dp` and `dq` must be writable.
 */
enum AdStatus ad_rhs_open(const struct AdModel *model, double p, double q, double *dp, double *dq);

/**
 * Right-hand side of the natives-only economy at `q`.
 *
 * # Safety
 * `model` must be a live handle; `dq` must be writable.
 */
enum AdStatus ad_rhs_closed(const struct AdModel *model, double q, double *dq);

/**
 * Analytic Jacobian of the open system at `(p, q)`, row-major into
 * `out[0..4]`: `d(dp)/dp, d(dp)/dq, d(dq)/dp, d(dq)/dq`.
 *
 * # Safety
 * `model` must be a live handle; `out` must have room for 4 doubles.
 */
enum AdStatus ad_jacobian(const struct AdModel *model, double p, double q, double *out);

/**
 * Derivative of the natives-only right-hand side at `q`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum AdStatus ad_closed_derivative(const struct AdModel *model, double q, double *out);

/**
 * Enumerates the steady states of the open economy, or of the natives-only
 * economy when `closed` is set. Release the list with
 * `ad_steady_states_free`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum AdStatus ad_steady_states(const struct AdModel *model,
                               bool closed,
                               struct AdSteadyStates **out);

/**
 * Number of entries; 0 for null.
 *
 * # Safety
 * `list` must be a live list or null.
 */
size_t ad_steady_states_len(const struct AdSteadyStates *list);

/**
 * # Safety
 * `list` must be a live list; `out` must be writable.
 */
enum AdStatus ad_steady_states_get(const struct AdSteadyStates *list,
                                   size_t index,
                                   struct AdSteadyState *out);

/**
 * # Safety
 * `list` must come from `ad_steady_states` and not have been freed.
 */
void ad_steady_states_free(struct AdSteadyStates *list);

/**
 * Integrates the open system with fixed-step RK4 and reports where the
 * trajectory ends.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum AdStatus ad_integrate(const struct AdModel *model,
                           double p0,
                           double q0,
                           double t_max,
                           double dt,
                           struct AdTerminal *out);

/**
 * Welfare at no assimilation without allowance against full assimilation
 * with the minimal allowance `A*`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum AdStatus ad_policy_verdict(const struct AdModel *model, struct AdWelfare *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ASSIMDYN_H */
