#ifndef DIRREP_H
#define DIRREP_H

/* Generated with cbindgen:0.27.0 */

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DrCombiner {
  DR_COMBINER_BONFERRONI = 0,
  DR_COMBINER_SIDAK = 1,
  DR_COMBINER_SIMES = 2,
  DR_COMBINER_FISHER = 3,
} DrCombiner;

typedef enum DrRule {
  DR_RULE_AUTO = 0,
  DR_RULE_MIN = 1,
  DR_RULE_DOUBLE = 2,
} DrRule;

typedef enum DrSign {
  DR_SIGN_NONE = 0,
  DR_SIGN_POSITIVE = 1,
  DR_SIGN_NEGATIVE = -1,
} DrSign;

typedef enum DrStatus {
  DR_STATUS_OK = 0,
  DR_STATUS_NULL_POINTER = 1,
  DR_STATUS_INVALID_ARGUMENT = 2,
  DR_STATUS_LENGTH_MISMATCH = 3,
  DR_STATUS_REGIME = 4,
  DR_STATUS_OUT_OF_RANGE = 5,
  DR_STATUS_PANIC = 6,
} DrStatus;

/**
 * Opaque outcome of the sequential choice of `r`.
 */
typedef struct DrAdaptive DrAdaptive;

/**
 * Opaque, validated test configuration.
 */
typedef struct DrQuery DrQuery;

typedef struct DrDirectionalResult {
  double p_plus;
  double p_minus;
  double p_final;
  /**
   * `DR_RULE_MIN` or `DR_RULE_DOUBLE`.
   */
  enum DrRule rule_applied;
  bool reject;
  enum DrSign sign;
  bool unproven_validity;
} DrDirectionalResult;

typedef struct DrAdaptiveStep {
  size_t r;
  double p_final;
  bool reject;
} DrAdaptiveStep;

typedef struct DrMcEstimate {
  double estimate;
  double std_error;
  uint64_t reps;
  uint64_t seed;
} DrMcEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a `DrStatus` value. Never null.
 */
const char *dr_status_message(int32_t status);

/**
 * Detail for the most recent failure on this thread, or null after a
 * success. The pointer stays valid until the next `dr_*` call on the
 * same thread.
 */
const char *dr_last_error_message(void);

/**
 * Create a query for `H_{r/n}`. `combiner` is a `DrCombiner`, `rule` a `DrRule`.
 */
enum DrStatus dr_query_new(size_t n,
                           size_t r,
                           double alpha,
                           uint32_t combiner,
                           uint32_t rule,
                           struct DrQuery **out);

/**
 * Release a query. Null is ignored.
 */
void dr_query_free(struct DrQuery *query);

enum DrStatus dr_min_rule_is_valid(size_t n, size_t r, uint32_t combiner, bool *out);

/**
 * Run the directional test on `len` z-scores.
 */
enum DrStatus dr_directional_test(const struct DrQuery *query,
                                  const double *z,
                                  size_t len,
                                  struct DrDirectionalResult *out);

/**
 * Sequential choice of `r`; release the handle with `dr_adaptive_free`.
 */
enum DrStatus dr_adaptive_new(const double *z,
                              size_t len,
                              double alpha,
                              uint32_t combiner,
                              struct DrAdaptive **out);

void dr_adaptive_free(struct DrAdaptive *result);

/**
 * First tested `r`. Returns 0 for a null handle.
 */
size_t dr_adaptive_k(const struct DrAdaptive *result);

/**
 * Lower confidence bound `l`. Returns 0 for a null handle.
 */
size_t dr_adaptive_l(const struct DrAdaptive *result);

/**
 * Number of tested hypotheses. Returns 0 for a null handle.
 */
size_t dr_adaptive_step_count(const struct DrAdaptive *result);

enum DrStatus dr_adaptive_step(const struct DrAdaptive *result,
                               size_t index,
                               struct DrAdaptiveStep *out);

/**
 * `t = Φ⁻¹(1 − α/(n − r + 1))`.
 */
enum DrStatus dr_threshold_t(size_t n, size_t r, double alpha, double *out);

/**
 * `1 − (1 − α/m)^m`, `m = n − r + 1`; needs `2r > n + 1`.
 */
enum DrStatus dr_sup_boundary(size_t n, size_t r, double alpha, double *out);

/**
 * Type I error with `r − 1` infinite positive effects; needs `2r <= n + 1`.
 */
enum DrStatus dr_c_concordant(size_t n, size_t r, double alpha, double *out);

/**
 * Type I error with `r − 1` infinite effects of each sign; needs `2r <= n + 1`.
 */
enum DrStatus dr_c_discordant(size_t n, size_t r, double alpha, double *out);

/**
 * Exact rejection probability at `theta` (length `n`) when `2r > n + 1`.
 */
enum DrStatus dr_c_exact_disjoint(const double *theta,
                                  size_t len,
                                  size_t r,
                                  double alpha,
                                  double *out);

/**
 * `g(g(θ₁))` for three studies and `r = 2`.
 */
enum DrStatus dr_gg(double theta1, double alpha, double *out);

/**
 * Monte Carlo rejection probability; reproducible from `(reps, seed)`.
 */
enum DrStatus dr_mc_type1(const struct DrQuery *query,
                          const double *theta,
                          size_t len,
                          uint64_t reps,
                          uint64_t seed,
                          struct DrMcEstimate *out);

/**
 * Monte Carlo probability of rejecting toward the wrong sign.
 */
enum DrStatus dr_mc_type3(const struct DrQuery *query,
                          const double *theta,
                          size_t len,
                          uint64_t reps,
                          uint64_t seed,
                          struct DrMcEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIRREP_H */
