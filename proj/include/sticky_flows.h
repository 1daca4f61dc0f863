#ifndef STICKY_FLOWS_H
#define STICKY_FLOWS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(STICKY_FLOWS_BUILD)
#define STICKY_API __attribute__((visibility("default")))
#else
#define STICKY_API
#endif

/* Status codes. Every call returns one; details via sticky_last_error(). */
typedef enum sticky_status {
  STICKY_OK = 0,
  STICKY_E_INVALID_ARGUMENT,
  STICKY_E_POLE,
  STICKY_E_DOMAIN,
  STICKY_E_BRANCH,
  STICKY_E_POLE_PROXIMITY,
  STICKY_E_NON_CONVERGENCE,
  STICKY_E_NESTING,
  STICKY_E_TRUNCATION,
  STICKY_E_TAIL,
  STICKY_E_DEGENERATE_STATE,
  STICKY_E_WINDOW,
  STICKY_E_UNDERFLOW,
  STICKY_E_SCHEMA,
  STICKY_E_IO,
  STICKY_E_NUMERIC,
  STICKY_E_INTERNAL
} sticky_status;

STICKY_API const char* sticky_version(void);
STICKY_API const char* sticky_status_name(sticky_status s);
/* Message of the last failed call on this thread ("" if none). */
STICKY_API const char* sticky_last_error(void);

/* Special functions and saddle data. */
STICKY_API sticky_status sticky_log_gamma(double re, double im, double* out_re, double* out_im);
STICKY_API sticky_status sticky_polygamma(int m, double re, double im, double* out_re, double* out_im);

typedef struct sticky_saddle {
  double lambda, theta, x_of_theta, J, sigma;
  int in_proven_regime;
} sticky_saddle;

STICKY_API sticky_status sticky_rate_function(double x, double* J);
STICKY_API sticky_status sticky_rate_function_derivative(double x, double* dJ);
STICKY_API sticky_status sticky_theta_to_x(double theta, double lambda, double* x);
STICKY_API sticky_status sticky_x_to_theta(double x, double lambda, double* theta);
STICKY_API sticky_status sticky_make_saddle(double theta, double lambda, sticky_saddle* out);
STICKY_API sticky_status sticky_saddle_h(const sticky_saddle* s, double re, double im, int order, double* out_re,
                                         double* out_im);

/* Fredholm determinants. */
typedef struct sticky_det_report {
  double value, imag, last_change, pivot_ratio, inner_tail_bound;
  int nodes;
} sticky_det_report;

/* nodes_per_segment <= 0, tolerance <= 0 and threads <= 0 select defaults. */
STICKY_API sticky_status sticky_laplace_transform(double lambda, double t, double x, double u, int nodes_per_segment,
                                                  double tolerance, int threads, sticky_det_report* out);
STICKY_API sticky_status sticky_beta_rwre_laplace(double alpha, double beta, int t, int x, double u,
                                                  sticky_det_report* out);
STICKY_API sticky_status sticky_tracy_widom_cdf(double y, double* out);
STICKY_API sticky_status sticky_tracy_widom_quantile(double p, double* out);
/* 1 - F_GUE(y), accurate in the right tail. */
STICKY_API sticky_status sticky_tracy_widom_sf(double y, double* out);
/* Interpolated table, accurate to about 1e-6; for bulk use. */
STICKY_API sticky_status sticky_tracy_widom_cdf_fast(double y, double* out);
STICKY_API sticky_status sticky_tracy_widom_quantile_fast(double p, double* out);

/* Moments. alphas may be NULL for the default ladder; nodes <= 0 for the default. */
STICKY_API sticky_status sticky_mixed_moment(int k, double lambda, double t, const double* xs, const double* alphas,
                                             int nodes, double* value, double* tail_bound);

typedef struct sticky_series {
  double value, remainder_bound, crude_bound;
  int terms;
} sticky_series;

STICKY_API sticky_status sticky_laplace_via_moments(double lambda, double t, double x, double u, int k_max,
                                                    double tail_tol, int nodes, sticky_series* out);
STICKY_API sticky_status sticky_kpz_limit_moment(int k, double t, const double* xs, double kappa, double lambda_probe,
                                                 int nodes, double* flow, double* she);

/* Environments. */
typedef struct sticky_env sticky_env;

STICKY_API sticky_status sticky_env_create(double alpha, double beta, int64_t t_max, int64_t x_lo, int64_t x_hi,
                                           uint64_t seed, uint64_t stream, sticky_env** out);
STICKY_API sticky_status sticky_env_load(const char* path, sticky_env** out);
STICKY_API sticky_status sticky_env_save(const sticky_env* env, const char* path);
STICKY_API void sticky_env_destroy(sticky_env* env);
STICKY_API sticky_status sticky_env_weight(const sticky_env* env, int64_t x, int64_t t, double* w);
STICKY_API sticky_status sticky_env_set_weight(sticky_env* env, int64_t x, int64_t t, double w);

typedef struct sticky_kernel sticky_kernel;

STICKY_API sticky_status sticky_quenched_kernel(const sticky_env* env, int64_t t, int64_t start_x,
                                                sticky_kernel** out);
STICKY_API void sticky_kernel_destroy(sticky_kernel* k);
/* Masses live at x_min + 2 i, scaled by exp(log_scale). */
STICKY_API sticky_status sticky_kernel_info(const sticky_kernel* k, int64_t* t, int64_t* x_min, size_t* count,
                                            double* log_scale);
STICKY_API sticky_status sticky_kernel_masses(const sticky_kernel* k, double* out, size_t count);
STICKY_API sticky_status sticky_quenched_tail(const sticky_env* env, int64_t t, int64_t start_x, int64_t threshold,
                                              int inclusive, double* out);
STICKY_API sticky_status sticky_polymer_partition(double nu, double mu, uint64_t seed, uint64_t stream, int64_t t,
                                                  int64_t n, double* out);

/* Sticky path bundles. */
typedef struct sticky_paths sticky_paths;

STICKY_API sticky_status sticky_sample_paths(double lambda, double epsilon, double t, int n, const double* x0s,
                                             uint64_t seed, sticky_paths** out);
STICKY_API void sticky_paths_destroy(sticky_paths* p);
STICKY_API sticky_status sticky_paths_info(const sticky_paths* p, int* n, int64_t* steps, double* epsilon);
/* steps + 1 rescaled positions of one walker. */
STICKY_API sticky_status sticky_paths_positions(const sticky_paths* p, int walker, double* out, size_t count);

/* Monte Carlo estimates. */
typedef struct sticky_mc_estimate {
  double mean, se;
  int n;
  uint64_t cells, clamps;
} sticky_mc_estimate;

STICKY_API sticky_status sticky_laplace_mc(double lambda, double t, double x, double u, double epsilon, int n_env,
                                           uint64_t seed, int workers, sticky_mc_estimate* out);
STICKY_API sticky_status sticky_moment_mc(int k, double lambda, double t, const double* xs, double epsilon, int n_env,
                                          uint64_t seed, int workers, sticky_mc_estimate* out);

/* LDP experiment. */
typedef struct sticky_ldp_config {
  double lambda, x_over_t, epsilon;
  const double* ts;
  size_t n_ts;
  int n_env;
  uint64_t seed;
  int workers;
  int allow_out_of_regime;
} sticky_ldp_config;

typedef struct sticky_ldp_row {
  double t;
  int64_t steps, threshold;
  double mean, variance, se, reference, annealed, annealed_exact;
} sticky_ldp_row;

typedef struct sticky_ldp_result sticky_ldp_result;

STICKY_API void sticky_ldp_config_default(sticky_ldp_config* cfg);
STICKY_API sticky_status sticky_ldp_run(const sticky_ldp_config* cfg, sticky_ldp_result** out);
STICKY_API void sticky_ldp_destroy(sticky_ldp_result* r);
STICKY_API size_t sticky_ldp_row_count(const sticky_ldp_result* r);
STICKY_API sticky_status sticky_ldp_get_row(const sticky_ldp_result* r, size_t i, sticky_ldp_row* out);
/* Per-environment (1/t) log K for row i; count must equal n_env. */
STICKY_API sticky_status sticky_ldp_rates(const sticky_ldp_result* r, size_t i, double* out, size_t count);

/* Tracy-Widom fluctuation experiment. */
typedef struct sticky_fluct_config {
  double lambda, theta, t, epsilon;
  int n_env;
  uint64_t seed;
  int workers, control_reps, allow_out_of_regime;
} sticky_fluct_config;

typedef struct sticky_fluct_summary {
  sticky_saddle saddle;
  int64_t steps, threshold;
  double ks, ks_p, median, tw_median, control_win_fraction;
  int n_samples, n_controls;
} sticky_fluct_summary;

typedef struct sticky_fluct_sample {
  double t, x_target, log_kernel, normalized;
} sticky_fluct_sample;

typedef struct sticky_fluct_result sticky_fluct_result;

STICKY_API void sticky_fluct_config_default(sticky_fluct_config* cfg);
STICKY_API sticky_status sticky_fluct_run(const sticky_fluct_config* cfg, sticky_fluct_result** out);
STICKY_API void sticky_fluct_destroy(sticky_fluct_result* r);
STICKY_API sticky_status sticky_fluct_summary_get(const sticky_fluct_result* r, sticky_fluct_summary* out);
STICKY_API sticky_status sticky_fluct_samples(const sticky_fluct_result* r, sticky_fluct_sample* out, size_t count);
STICKY_API sticky_status sticky_fluct_control_ks(const sticky_fluct_result* r, double* out, size_t count);
STICKY_API double sticky_fluct_normalize(const sticky_saddle* s, double t, double log_kernel);
STICKY_API double sticky_fluct_unnormalize(const sticky_saddle* s, double t, double normalized);

/* Extremal particle experiment. */
typedef struct sticky_extremal_config {
  double lambda, c, t, epsilon;
  int n_env;
  uint64_t seed;
  int workers;
} sticky_extremal_config;

typedef struct sticky_extremal_summary {
  double x0, theta0, sigma0, slope, log_n, mean_over_t;
  int n;
} sticky_extremal_summary;

typedef struct sticky_extremal_result sticky_extremal_result;

STICKY_API void sticky_extremal_config_default(sticky_extremal_config* cfg);
STICKY_API sticky_status sticky_extremal_run(const sticky_extremal_config* cfg, sticky_extremal_result** out);
STICKY_API void sticky_extremal_destroy(sticky_extremal_result* r);
STICKY_API sticky_status sticky_extremal_summary_get(const sticky_extremal_result* r, sticky_extremal_summary* out);
/* Max locations (continuum units) and their normalized values. */
STICKY_API sticky_status sticky_extremal_samples(const sticky_extremal_result* r, double* location, double* normalized,
                                                 size_t count);

/* Statistics. */
STICKY_API sticky_status sticky_ks_tracy_widom(const double* x, size_t n, double* statistic, double* p_value);
STICKY_API sticky_status sticky_ks_two_sample(const double* a, size_t na, const double* b, size_t nb,
                                              double* statistic, double* p_value);

#ifdef __cplusplus
}
#endif

#endif
