#ifndef ORDINAL_BAYES_H
#define ORDINAL_BAYES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ObStatus {
  OB_STATUS_OK = 0,
  OB_STATUS_NULL_POINTER = 1,
  OB_STATUS_INVALID_ARGUMENT = 2,
  OB_STATUS_DATA = 3,
  OB_STATUS_NUMERICAL = 4,
  OB_STATUS_IO = 5,
  OB_STATUS_PANIC = 6,
} ObStatus;

/**
 * Variance reading of the GRM prior hyperparameter.
 */
typedef enum ObConvention {
  OB_CONVENTION_PRECISION = 0,
  OB_CONVENTION_VARIANCE = 1,
} ObConvention;

/**
 * Opaque survey dataset.
 */
typedef struct ObDataset ObDataset;

/**
 * Opaque GRM posterior.
 */
typedef struct ObGrmPosterior ObGrmPosterior;

/**
 * Opaque MRF posterior.
 */
typedef struct ObMrfPosterior ObMrfPosterior;

typedef struct ObMcmcConfig {
  size_t iterations;
  size_t burn_in;
  size_t thin;
  size_t chains;
  uint64_t seed;
} ObMcmcConfig;

typedef struct ObEdgeSummary {
  size_t a;
  size_t b;
  double inclusion_prob;
  double bf10;
  bool bf10_saturated;
  double theta_mean;
  double theta_sd;
  double ci_low;
  double ci_high;
} ObEdgeSummary;

/**
 * `rhat` is NaN when the run had a single chain.
 */
typedef struct ObParamSummary {
  double mean;
  double sd;
  double ci_low;
  double ci_high;
  double rhat;
} ObParamSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *ob_last_error_message(void);

/**
 * Static, NUL-terminated library version.
 */
const char *ob_version(void);

struct ObMcmcConfig ob_mcmc_config_mrf_default(void);

struct ObMcmcConfig ob_mcmc_config_grm_default(void);

/**
 * Loads a survey CSV. A null `codebook_path` selects the built-in demo
 * codebook.
 *
 * # Safety
 * Strings must be NUL-terminated; `out` must be writable.
 */
enum ObStatus ob_dataset_load(const char *csv_path,
                              const char *codebook_path,
                              struct ObDataset **out_dataset);

/**
 * Keeps only rows with every item and the listed covariates present.
 * `covariates` is a comma-separated list and may be null.
 *
 * # Safety
 * `dataset` must be a live handle; `out_dataset` must be writable.
 */
enum ObStatus ob_dataset_complete_cases(const struct ObDataset *dataset,
                                        const char *covariates,
                                        struct ObDataset **out_dataset);

/**
 * # Safety
 * `dataset` must be a live handle or null.
 */
size_t ob_dataset_n_rows(const struct ObDataset *dataset);

/**
 * # Safety
 * `dataset` must be a live handle or null.
 */
size_t ob_dataset_n_items(const struct ObDataset *dataset);

/**
 * # Safety
 * `dataset` must come from this library and not be freed twice. Null is
 * ignored.
 */
void ob_dataset_free(struct ObDataset *dataset);

/**
 * Fits the MRF over all items plus the listed covariates with the default
 * prior. Rows with missing values make this fail with `DATA`; see
 * [`ob_dataset_complete_cases`].
 *
 * # Safety
 * `dataset` must be a live handle, `config` readable, `out_posterior`
 * writable.
 */
enum ObStatus ob_mrf_fit(const struct ObDataset *dataset,
                         const char *covariates,
                         const struct ObMcmcConfig *config,
                         struct ObMrfPosterior **out_posterior);

/**
 * Number of nodes (items plus covariates).
 *
 * # Safety
 * `posterior` must be a live handle or null.
 */
size_t ob_mrf_n_nodes(const struct ObMrfPosterior *posterior);

/**
 * Name of node `i`, written NUL-terminated into `buf` of `len` bytes.
 * `out_required` (may be null) receives the length needed including the
 * terminator; a too-small buffer yields `INVALID_ARGUMENT`.
 *
 * # Safety
 * `buf` must have room for `len` bytes.
 */
enum ObStatus ob_mrf_node_name(const struct ObMrfPosterior *posterior,
                               size_t i,
                               char *buf,
                               size_t len,
                               size_t *out_required);

/**
 * Summary of the edge between nodes `i` and `j` (order irrelevant).
 *
 * # Safety
 * `posterior` must be a live handle, `out_edge` writable.
 */
enum ObStatus ob_mrf_edge(const struct ObMrfPosterior *posterior,
                          size_t i,
                          size_t j,
                          struct ObEdgeSummary *out_edge);

/**
 * Row-major p x p matrix of posterior inclusion probabilities (zero
 * diagonal). `len` must be at least p * p.
 *
 * # Safety
 * `buf` must have room for `len` doubles.
 */
enum ObStatus ob_mrf_inclusion_matrix(const struct ObMrfPosterior *posterior,
                                      double *buf,
                                      size_t len);

/**
 * # Safety
 * `posterior` must come from this library and not be freed twice.
 */
void ob_mrf_posterior_free(struct ObMrfPosterior *posterior);

/**
 * Fits the GRM on all items with the listed covariates. `hyperparameter`
 * is read according to `convention`.
 *
 * # Safety
 * `dataset` must be a live handle, `config` readable, `out_posterior`
 * writable.
 */
enum ObStatus ob_grm_fit(const struct ObDataset *dataset,
                         const char *covariates,
                         const struct ObMcmcConfig *config,
                         double hyperparameter,
                         enum ObConvention convention,
                         struct ObGrmPosterior **out_posterior);

/**
 * # Safety
 * `posterior` must be a live handle or null.
 */
size_t ob_grm_n_respondents(const struct ObGrmPosterior *posterior);

/**
 * Summary of a named parameter such as `theta[3]`, `gamma[DrE]`,
 * `beta[DrE]`, `delta[2]` or `alpha[G]`.
 *
 * # Safety
 * `name` must be NUL-terminated, `out_summary` writable.
 */
enum ObStatus ob_grm_param(const struct ObGrmPosterior *posterior,
                           const char *name,
                           struct ObParamSummary *out_summary);

/**
 * Posterior means of the latent traits, one per respondent.
 *
 * # Safety
 * `buf` must have room for `len` doubles.
 */
enum ObStatus ob_grm_theta_means(const struct ObGrmPosterior *posterior, double *buf, size_t len);

/**
 * Largest R-hat over all parameters; NaN for a single chain.
 *
 * # Safety
 * `out_rhat` must be writable.
 */
enum ObStatus ob_grm_max_rhat(const struct ObGrmPosterior *posterior, double *out_rhat);

/**
 * # Safety
 * `posterior` must come from this library and not be freed twice.
 */
void ob_grm_posterior_free(struct ObGrmPosterior *posterior);

/**
 * Gelman-Rubin R-hat of `n_chains` chains of `n_draws` each, stored
 * chain after chain.
 *
 * # Safety
 * `draws` must point to `n_chains * n_draws` doubles.
 */
enum ObStatus ob_gelman_rubin(const double *draws,
                              size_t n_chains,
                              size_t n_draws,
                              double *out_rhat);

/**
 * Inclusion Bayes factor from posterior and prior inclusion probabilities.
 *
 * # Safety
 * `out_bf10` must be writable.
 */
enum ObStatus ob_inclusion_bf10(double posterior, double prior, double *out_bf10);

/**
 * GRM probability of category `h` (1-based) given `n_delta` category
 * offsets, the first of which must be zero.
 *
 * # Safety
 * `delta` must point to `n_delta` doubles.
 */
enum ObStatus ob_grm_category_prob(double theta,
                                   double gamma,
                                   double beta,
                                   const double *delta,
                                   size_t n_delta,
                                   size_t h,
                                   double *out_prob);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORDINAL_BAYES_H */
