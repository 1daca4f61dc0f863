#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "sticky/environment.hpp"
#include "sticky/errors.hpp"
#include "sticky/experiments.hpp"
#include "sticky/fredholm.hpp"
#include "sticky/moments.hpp"
#include "sticky/rwre.hpp"
#include "sticky/saddle.hpp"
#include "sticky/specfun.hpp"
#include "sticky/stats.hpp"
#include "sticky_flows.h"

using namespace sticky;

struct sticky_env {
  EnvironmentGrid grid;
};
struct sticky_kernel {
  QuenchedKernel k;
};
struct sticky_paths {
  PathBundle b;
};
struct sticky_ldp_result {
  LdpResult r;
};
struct sticky_fluct_result {
  FluctuationResult r;
};
struct sticky_extremal_result {
  ExtremalResult r;
};

static_assert(static_cast<int>(ErrorCode::numeric) == STICKY_E_NUMERIC);
static_assert(static_cast<int>(ErrorCode::window) == STICKY_E_WINDOW);

namespace {

thread_local std::string g_last_error;

template <class Fn>
sticky_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return STICKY_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<sticky_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return STICKY_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return STICKY_E_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::invalid_argument, std::string(what) + " is null");
}

void need_count(size_t have, size_t want) {
  if (have != want)
    fail(ErrorCode::invalid_argument, "buffer holds " + std::to_string(have) + ", need " + std::to_string(want));
}

SaddleData to_cpp(const sticky_saddle& s) {
  SaddleData d;
  d.lambda = s.lambda;
  d.theta = s.theta;
  d.x_of_theta = s.x_of_theta;
  d.J = s.J;
  d.sigma = s.sigma;
  d.in_proven_regime = s.in_proven_regime != 0;
  return d;
}

sticky_saddle to_c(const SaddleData& d) {
  return {d.lambda, d.theta, d.x_of_theta, d.J, d.sigma, d.in_proven_regime ? 1 : 0};
}

void fill_report(const DetReport& r, sticky_det_report* out) {
  *out = {r.value, r.imag, r.last_change, r.pivot_ratio, r.inner_tail_bound, r.nodes};
}

void fill_mc(const McEstimate& e, sticky_mc_estimate* out) { *out = {e.mean, e.se, e.n, e.cells, e.clamps}; }

}  // namespace

extern "C" {

const char* sticky_version(void) { return "1.0.0"; }

const char* sticky_status_name(sticky_status s) {
  if (s == STICKY_E_INTERNAL) return "InternalError";
  if (s < STICKY_OK || s > STICKY_E_INTERNAL) return "unknown";
  return error_code_name(static_cast<ErrorCode>(s));
}

const char* sticky_last_error(void) { return g_last_error.c_str(); }

sticky_status sticky_log_gamma(double re, double im, double* out_re, double* out_im) {
  return guard([&] {
    need(out_re, "out_re");
    need(out_im, "out_im");
    const Complex v = log_gamma({re, im});
    *out_re = v.real();
    *out_im = v.imag();
  });
}

sticky_status sticky_polygamma(int m, double re, double im, double* out_re, double* out_im) {
  return guard([&] {
    need(out_re, "out_re");
    need(out_im, "out_im");
    const Complex v = polygamma(m, {re, im});
    *out_re = v.real();
    *out_im = v.imag();
  });
}

sticky_status sticky_rate_function(double x, double* J) {
  return guard([&] {
    need(J, "J");
    *J = rate_function(x);
  });
}

sticky_status sticky_rate_function_derivative(double x, double* dJ) {
  return guard([&] {
    need(dJ, "dJ");
    *dJ = rate_function_derivative(x);
  });
}

sticky_status sticky_theta_to_x(double theta, double lambda, double* x) {
  return guard([&] {
    need(x, "x");
    *x = theta_to_x(theta, lambda);
  });
}

sticky_status sticky_x_to_theta(double x, double lambda, double* theta) {
  return guard([&] {
    need(theta, "theta");
    *theta = x_to_theta(x, lambda);
  });
}

sticky_status sticky_make_saddle(double theta, double lambda, sticky_saddle* out) {
  return guard([&] {
    need(out, "out");
    *out = to_c(make_saddle(theta, lambda));
  });
}

sticky_status sticky_saddle_h(const sticky_saddle* s, double re, double im, int order, double* out_re,
                              double* out_im) {
  return guard([&] {
    need(s, "saddle");
    need(out_re, "out_re");
    need(out_im, "out_im");
    const Complex v = h_eval({re, im}, to_cpp(*s), order);
    *out_re = v.real();
    *out_im = v.imag();
  });
}

sticky_status sticky_laplace_transform(double lambda, double t, double x, double u, int nodes_per_segment,
                                       double tolerance, int threads, sticky_det_report* out) {
  return guard([&] {
    need(out, "out");
    DetOptions o;
    if (threads > 0) o.threads = threads;
    if (nodes_per_segment > 0) o.nodes_per_segment = nodes_per_segment;
    if (tolerance > 0.0) o.tolerance = tolerance;
    fill_report(laplace_transform(lambda, t, x, u, o), out);
  });
}

sticky_status sticky_beta_rwre_laplace(double alpha, double beta, int t, int x, double u, sticky_det_report* out) {
  return guard([&] {
    need(out, "out");
    fill_report(beta_rwre_laplace(alpha, beta, t, x, u), out);
  });
}

sticky_status sticky_tracy_widom_cdf(double y, double* out) {
  return guard([&] {
    need(out, "out");
    *out = tracy_widom_cdf(y);
  });
}

sticky_status sticky_tracy_widom_quantile(double p, double* out) {
  return guard([&] {
    need(out, "out");
    *out = tracy_widom_quantile(p);
  });
}

sticky_status sticky_tracy_widom_sf(double y, double* out) {
  return guard([&] {
    need(out, "out");
    *out = tracy_widom_sf(y);
  });
}

sticky_status sticky_tracy_widom_cdf_fast(double y, double* out) {
  return guard([&] {
    need(out, "out");
    *out = tracy_widom_cdf_fast(y);
  });
}

sticky_status sticky_tracy_widom_quantile_fast(double p, double* out) {
  return guard([&] {
    need(out, "out");
    *out = tracy_widom_quantile_fast(p);
  });
}

sticky_status sticky_mixed_moment(int k, double lambda, double t, const double* xs, const double* alphas, int nodes,
                                  double* value, double* tail_bound) {
  return guard([&] {
    need(xs, "xs");
    need(value, "value");
    require(k >= 1 && k <= kMaxMomentOrder, "k out of range");
    MomentRequest r{k, lambda, t, std::vector<double>(xs, xs + k), {}, 1.0};
    if (alphas) r.alphas.assign(alphas, alphas + k);
    const MomentResult m = mixed_moment(r, nodes > 0 ? nodes : 0);
    *value = m.value;
    if (tail_bound) *tail_bound = m.tail_bound;
  });
}

sticky_status sticky_laplace_via_moments(double lambda, double t, double x, double u, int k_max, double tail_tol,
                                         int nodes, sticky_series* out) {
  return guard([&] {
    need(out, "out");
    const SeriesResult s = laplace_via_moments(lambda, t, x, u, k_max, tail_tol > 0.0 ? tail_tol : 1e-8, nodes);
    *out = {s.value, s.remainder_bound, s.crude_bound, static_cast<int>(s.terms.size())};
  });
}

sticky_status sticky_kpz_limit_moment(int k, double t, const double* xs, double kappa, double lambda_probe, int nodes,
                                      double* flow, double* she) {
  return guard([&] {
    need(xs, "xs");
    need(flow, "flow");
    need(she, "she");
    require(k >= 1 && k <= kMaxMomentOrder, "k out of range");
    const KpzPair p = kpz_limit_moment(k, t, std::vector<double>(xs, xs + k), kappa, lambda_probe, nodes);
    *flow = p.flow;
    *she = p.she;
  });
}

sticky_status sticky_env_create(double alpha, double beta, int64_t t_max, int64_t x_lo, int64_t x_hi, uint64_t seed,
                                uint64_t stream, sticky_env** out) {
  return guard([&] {
    need(out, "out");
    *out = new sticky_env{EnvironmentGrid(alpha, beta, t_max, x_lo, x_hi, seed, stream)};
  });
}

sticky_status sticky_env_load(const char* path, sticky_env** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new sticky_env{EnvironmentGrid::read_sbm1(path)};
  });
}

sticky_status sticky_env_save(const sticky_env* env, const char* path) {
  return guard([&] {
    need(env, "env");
    need(path, "path");
    env->grid.write_sbm1(path);
  });
}

void sticky_env_destroy(sticky_env* env) { delete env; }

sticky_status sticky_env_weight(const sticky_env* env, int64_t x, int64_t t, double* w) {
  return guard([&] {
    need(env, "env");
    need(w, "w");
    *w = env->grid.weight(x, t);
  });
}

sticky_status sticky_env_set_weight(sticky_env* env, int64_t x, int64_t t, double w) {
  return guard([&] {
    need(env, "env");
    env->grid.set_weight(x, t, w);
  });
}

sticky_status sticky_quenched_kernel(const sticky_env* env, int64_t t, int64_t start_x, sticky_kernel** out) {
  return guard([&] {
    need(env, "env");
    need(out, "out");
    *out = new sticky_kernel{quenched_kernel(env->grid, t, start_x)};
  });
}

void sticky_kernel_destroy(sticky_kernel* k) { delete k; }

sticky_status sticky_kernel_info(const sticky_kernel* k, int64_t* t, int64_t* x_min, size_t* count,
                                 double* log_scale) {
  return guard([&] {
    need(k, "kernel");
    if (t) *t = k->k.t;
    if (x_min) *x_min = k->k.x_min;
    if (count) *count = k->k.masses.size();
    if (log_scale) *log_scale = k->k.log_scale;
  });
}

sticky_status sticky_kernel_masses(const sticky_kernel* k, double* out, size_t count) {
  return guard([&] {
    need(k, "kernel");
    need(out, "out");
    need_count(count, k->k.masses.size());
    std::memcpy(out, k->k.masses.data(), count * sizeof(double));
  });
}

sticky_status sticky_quenched_tail(const sticky_env* env, int64_t t, int64_t start_x, int64_t threshold,
                                   int inclusive, double* out) {
  return guard([&] {
    need(env, "env");
    need(out, "out");
    *out = quenched_tail(env->grid, t, start_x, threshold, inclusive ? TailKind::inclusive : TailKind::strict);
  });
}

sticky_status sticky_polymer_partition(double nu, double mu, uint64_t seed, uint64_t stream, int64_t t, int64_t n,
                                       double* out) {
  return guard([&] {
    need(out, "out");
    *out = polymer_partition(polymer_environment(nu, mu, seed, stream), t, n);
  });
}

sticky_status sticky_sample_paths(double lambda, double epsilon, double t, int n, const double* x0s, uint64_t seed,
                                  sticky_paths** out) {
  return guard([&] {
    need(x0s, "x0s");
    need(out, "out");
    require(n >= 1, "n must be positive");
    *out = new sticky_paths{
        sample_sticky_paths(lambda, epsilon, t, n, std::vector<double>(x0s, x0s + n), seed)};
  });
}

void sticky_paths_destroy(sticky_paths* p) { delete p; }

sticky_status sticky_paths_info(const sticky_paths* p, int* n, int64_t* steps, double* epsilon) {
  return guard([&] {
    need(p, "paths");
    if (n) *n = static_cast<int>(p->b.paths.size());
    if (steps) *steps = p->b.steps;
    if (epsilon) *epsilon = p->b.epsilon;
  });
}

sticky_status sticky_paths_positions(const sticky_paths* p, int walker, double* out, size_t count) {
  return guard([&] {
    need(p, "paths");
    need(out, "out");
    require(walker >= 0 && static_cast<size_t>(walker) < p->b.paths.size(), "walker out of range");
    need_count(count, static_cast<size_t>(p->b.steps) + 1);
    for (size_t s = 0; s < count; ++s) out[s] = p->b.position(walker, static_cast<int64_t>(s));
  });
}

sticky_status sticky_laplace_mc(double lambda, double t, double x, double u, double epsilon, int n_env, uint64_t seed,
                                int workers, sticky_mc_estimate* out) {
  return guard([&] {
    need(out, "out");
    LaplaceMcConfig c;
    c.lambda = lambda;
    c.t = t;
    c.x = x;
    c.u = u;
    c.epsilon = epsilon;
    c.n_env = n_env;
    c.seed = seed;
    c.workers = workers;
    fill_mc(laplace_monte_carlo(c), out);
  });
}

sticky_status sticky_moment_mc(int k, double lambda, double t, const double* xs, double epsilon, int n_env,
                               uint64_t seed, int workers, sticky_mc_estimate* out) {
  return guard([&] {
    need(xs, "xs");
    need(out, "out");
    require(k >= 1, "k must be positive");
    MomentMcConfig c;
    c.lambda = lambda;
    c.t = t;
    c.xs.assign(xs, xs + k);
    c.epsilon = epsilon;
    c.n_env = n_env;
    c.seed = seed;
    c.workers = workers;
    fill_mc(moment_monte_carlo(c), out);
  });
}

void sticky_ldp_config_default(sticky_ldp_config* cfg) {
  if (!cfg) return;
  static const double ts[] = {5.0, 10.0, 20.0};
  const LdpConfig d;
  *cfg = {d.lambda, d.x_over_t, d.epsilon, ts, 3, d.n_env, d.seed, d.workers, 0};
}

sticky_status sticky_ldp_run(const sticky_ldp_config* cfg, sticky_ldp_result** out) {
  return guard([&] {
    need(cfg, "config");
    need(out, "out");
    require(cfg->ts || cfg->n_ts == 0, "ts is null");
    LdpConfig c;
    c.lambda = cfg->lambda;
    c.x_over_t = cfg->x_over_t;
    c.epsilon = cfg->epsilon;
    c.ts.assign(cfg->ts, cfg->ts + cfg->n_ts);
    c.n_env = cfg->n_env;
    c.seed = cfg->seed;
    c.workers = cfg->workers;
    c.allow_out_of_regime = cfg->allow_out_of_regime != 0;
    *out = new sticky_ldp_result{ldp_experiment(c)};
  });
}

void sticky_ldp_destroy(sticky_ldp_result* r) { delete r; }

size_t sticky_ldp_row_count(const sticky_ldp_result* r) { return r ? r->r.rows.size() : 0; }

sticky_status sticky_ldp_get_row(const sticky_ldp_result* r, size_t i, sticky_ldp_row* out) {
  return guard([&] {
    need(r, "result");
    need(out, "out");
    require(i < r->r.rows.size(), "row out of range");
    const LdpRow& w = r->r.rows[i];
    *out = {w.t, w.steps, w.threshold, w.mean, w.variance, w.se, w.reference, w.annealed, w.annealed_exact};
  });
}

sticky_status sticky_ldp_rates(const sticky_ldp_result* r, size_t i, double* out, size_t count) {
  return guard([&] {
    need(r, "result");
    need(out, "out");
    require(i < r->r.rows.size(), "row out of range");
    const auto& v = r->r.rows[i].rates;
    need_count(count, v.size());
    std::memcpy(out, v.data(), count * sizeof(double));
  });
}

void sticky_fluct_config_default(sticky_fluct_config* cfg) {
  if (!cfg) return;
  const FluctuationConfig d;
  *cfg = {d.lambda, d.theta, d.t, d.epsilon, d.n_env, d.seed, d.workers, d.control_reps, 0};
}

sticky_status sticky_fluct_run(const sticky_fluct_config* cfg, sticky_fluct_result** out) {
  return guard([&] {
    need(cfg, "config");
    need(out, "out");
    FluctuationConfig c;
    c.lambda = cfg->lambda;
    c.theta = cfg->theta;
    c.t = cfg->t;
    c.epsilon = cfg->epsilon;
    c.n_env = cfg->n_env;
    c.seed = cfg->seed;
    c.workers = cfg->workers;
    c.control_reps = cfg->control_reps;
    c.allow_out_of_regime = cfg->allow_out_of_regime != 0;
    *out = new sticky_fluct_result{fluctuation_experiment(c)};
  });
}

void sticky_fluct_destroy(sticky_fluct_result* r) { delete r; }

sticky_status sticky_fluct_summary_get(const sticky_fluct_result* r, sticky_fluct_summary* out) {
  return guard([&] {
    need(r, "result");
    need(out, "out");
    const FluctuationResult& f = r->r;
    *out = {to_c(f.saddle), f.steps, f.threshold, f.ks, f.ks_p, f.median, f.tw_median, f.control_win_fraction,
            static_cast<int>(f.samples.size()), static_cast<int>(f.control_ks.size())};
  });
}

sticky_status sticky_fluct_samples(const sticky_fluct_result* r, sticky_fluct_sample* out, size_t count) {
  return guard([&] {
    need(r, "result");
    need(out, "out");
    need_count(count, r->r.samples.size());
    for (size_t i = 0; i < count; ++i) {
      const auto& s = r->r.samples[i];
      out[i] = {s.t, s.x_target, s.log_kernel, s.normalized};
    }
  });
}

sticky_status sticky_fluct_control_ks(const sticky_fluct_result* r, double* out, size_t count) {
  return guard([&] {
    need(r, "result");
    need(out, "out");
    need_count(count, r->r.control_ks.size());
    std::memcpy(out, r->r.control_ks.data(), count * sizeof(double));
  });
}

double sticky_fluct_normalize(const sticky_saddle* s, double t, double log_kernel) {
  return s ? normalize_log_kernel(to_cpp(*s), t, log_kernel) : 0.0;
}

double sticky_fluct_unnormalize(const sticky_saddle* s, double t, double normalized) {
  return s ? unnormalize(to_cpp(*s), t, normalized) : 0.0;
}

void sticky_extremal_config_default(sticky_extremal_config* cfg) {
  if (!cfg) return;
  const ExtremalConfig d;
  *cfg = {d.lambda, d.c, d.t, d.epsilon, d.n_env, d.seed, d.workers};
}

sticky_status sticky_extremal_run(const sticky_extremal_config* cfg, sticky_extremal_result** out) {
  return guard([&] {
    need(cfg, "config");
    need(out, "out");
    ExtremalConfig c;
    c.lambda = cfg->lambda;
    c.c = cfg->c;
    c.t = cfg->t;
    c.epsilon = cfg->epsilon;
    c.n_env = cfg->n_env;
    c.seed = cfg->seed;
    c.workers = cfg->workers;
    *out = new sticky_extremal_result{extremal_particle_experiment(c)};
  });
}

void sticky_extremal_destroy(sticky_extremal_result* r) { delete r; }

sticky_status sticky_extremal_summary_get(const sticky_extremal_result* r, sticky_extremal_summary* out) {
  return guard([&] {
    need(r, "result");
    need(out, "out");
    const ExtremalResult& e = r->r;
    *out = {e.x0, e.theta0, e.sigma0, e.slope, e.log_n, e.mean_over_t, static_cast<int>(e.max_location.size())};
  });
}

sticky_status sticky_extremal_samples(const sticky_extremal_result* r, double* location, double* normalized,
                                      size_t count) {
  return guard([&] {
    need(r, "result");
    need_count(count, r->r.max_location.size());
    if (location) std::memcpy(location, r->r.max_location.data(), count * sizeof(double));
    if (normalized) std::memcpy(normalized, r->r.normalized.data(), count * sizeof(double));
  });
}

sticky_status sticky_ks_tracy_widom(const double* x, size_t n, double* statistic, double* p_value) {
  return guard([&] {
    need(x, "x");
    const KsResult k = ks_one_sample(std::vector<double>(x, x + n), tracy_widom_cdf_fast);
    if (statistic) *statistic = k.statistic;
    if (p_value) *p_value = k.p_value;
  });
}

sticky_status sticky_ks_two_sample(const double* a, size_t na, const double* b, size_t nb, double* statistic,
                                   double* p_value) {
  return guard([&] {
    need(a, "a");
    need(b, "b");
    const KsResult k = ks_two_sample(std::vector<double>(a, a + na), std::vector<double>(b, b + nb));
    if (statistic) *statistic = k.statistic;
    if (p_value) *p_value = k.p_value;
  });
}

}  // extern "C"
