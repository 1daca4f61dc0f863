#include "sticky/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sticky/errors.hpp"
#include "sticky/fredholm.hpp"
#include "sticky/parallel.hpp"
#include "sticky/rng.hpp"
#include "sticky/stats.hpp"

namespace sticky {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Tail mass in the kernel's scaled units.
double scaled_tail(const QuenchedKernel& k, double y, bool smoothed) {
  double sum = 0.0;
  for (size_t i = 0; i < k.masses.size(); ++i) {
    const double x = static_cast<double>(k.x_min + 2 * static_cast<int64_t>(i));
    sum += smoothed ? k.masses[i] * std::clamp((x - y + 1.0) / 2.0, 0.0, 1.0) : (x >= y ? k.masses[i] : 0.0);
  }
  return sum;
}

// Decay of log K per lattice unit of threshold at continuum speed v.
double lattice_slope(double lambda, double v, double epsilon) {
  return lambda * rate_function_derivative(v / lambda) * epsilon;
}

// Band end width that keeps all but e^-40 of the tail beyond the threshold.
double tail_overshoot(double lambda, double v, double epsilon) { return 40.0 / lattice_slope(lambda, v, epsilon); }

McEstimate summarize(const std::vector<double>& v, const std::vector<uint64_t>& cells) {
  McEstimate e;
  e.n = static_cast<int>(v.size());
  e.mean = mean(v);
  e.se = v.size() > 1 ? standard_error(v) : 0.0;
  for (uint64_t c : cells) e.cells += c;
  return e;
}

// log P(S_steps >= n) for the simple random walk.
double srw_log_tail(int64_t steps, int64_t n) {
  const int64_t first = std::max<int64_t>(0, (steps + n + 1) / 2);
  if (first > steps) return kNegInf;
  std::vector<double> terms;
  const double lt = std::lgamma(static_cast<double>(steps) + 1.0);
  for (int64_t u = first; u <= steps; ++u) {
    terms.push_back(lt - std::lgamma(static_cast<double>(u) + 1.0) - std::lgamma(static_cast<double>(steps - u) + 1.0) -
                    static_cast<double>(steps) * M_LN2);
    if (terms.back() < terms.front() - 60.0) break;
  }
  return log_mean_exp(terms) + std::log(static_cast<double>(terms.size()));
}

}  // namespace

double bridge_log_tail(const Environment& env, int64_t start_x, int64_t steps, double y, double band_c,
                       double overshoot, bool smoothed, uint64_t* cells) {
  const double tilt = tilt_for_speed((y - static_cast<double>(start_x)) / static_cast<double>(steps));
  const BandResult r = band_forward(env, start_x, steps, bridge_band(start_x, steps, y, band_c, overshoot), tilt);
  if (cells) *cells += r.cells;
  const double sum = scaled_tail(r.kernel, y, smoothed);
  if (!(sum > 0.0)) fail(ErrorCode::underflow, "tail mass vanished inside the band");
  return std::log(sum) + r.kernel.log_scale;
}

double target_tail(const Environment& env, int64_t start_x, int64_t steps, double y, double band_c,
                   uint64_t* cells) {
  const BandResult r = band_forward(env, start_x, steps, target_band(start_x, steps, y, band_c));
  if (cells) *cells += r.cells;
  return (r.absorbed + scaled_tail(r.kernel, y, true)) * std::exp(r.kernel.log_scale);
}

McEstimate laplace_monte_carlo(const LaplaceMcConfig& cfg) {
  require(cfg.lambda > 0.0 && cfg.t > 0.0, "lambda and t must be positive");
  require(cfg.epsilon > 0.0 && cfg.epsilon <= 0.2, "epsilon must lie in (0, 0.2]");
  require(cfg.n_env >= 2, "need at least two environments");
  require(std::isfinite(cfg.u), "u must be finite");
  const int64_t steps = steps_for(cfg.t, cfg.epsilon);
  const double a = cfg.lambda * cfg.epsilon, y = cfg.x / cfg.epsilon;
  std::vector<double> v(cfg.n_env);
  std::vector<uint64_t> cells(cfg.n_env, 0), clamps(cfg.n_env, 0);
  parallel_for(static_cast<size_t>(cfg.n_env), cfg.workers, [&](size_t i) {
    const Environment env(a, a, cfg.seed, i);
    v[i] = std::exp(cfg.u * target_tail(env, 0, steps, y, cfg.band_c, &cells[i]));
    clamps[i] = env.clamp_count();
  });
  McEstimate e = summarize(v, cells);
  for (uint64_t c : clamps) e.clamps += c;
  return e;
}

McEstimate moment_monte_carlo(const MomentMcConfig& cfg) {
  require(cfg.lambda > 0.0 && cfg.t > 0.0, "lambda and t must be positive");
  require(cfg.epsilon > 0.0 && cfg.epsilon <= 0.2, "epsilon must lie in (0, 0.2]");
  require(!cfg.xs.empty(), "need at least one starting point");
  require(cfg.n_env >= 2, "need at least two environments");
  const int64_t steps = steps_for(cfg.t, cfg.epsilon);
  const double a = cfg.lambda * cfg.epsilon;
  std::vector<double> v(cfg.n_env);
  std::vector<uint64_t> cells(cfg.n_env, 0), clamps(cfg.n_env, 0);
  parallel_for(static_cast<size_t>(cfg.n_env), cfg.workers, [&](size_t i) {
    const Environment env(a, a, cfg.seed, i);
    double p = 1.0;
    for (double x : cfg.xs) {
      // Start on the lattice of the right parity; the half-atom rule then
      // makes the threshold continuous in x.
      const double s = x / cfg.epsilon;
      const int64_t s0 = 2 * static_cast<int64_t>(std::floor(s / 2.0));
      p *= target_tail(env, s0, steps, static_cast<double>(s0) - s, cfg.band_c, &cells[i]);
    }
    v[i] = p;
    clamps[i] = env.clamp_count();
  });
  McEstimate e = summarize(v, cells);
  for (uint64_t c : clamps) e.clamps += c;
  return e;
}

LdpResult ldp_experiment(const LdpConfig& cfg) {
  require(cfg.lambda > 0.0 && cfg.x_over_t > 0.0, "lambda and x must be positive");
  require(cfg.epsilon > 0.0 && cfg.epsilon <= 0.2, "epsilon must lie in (0, 0.2]");
  require(cfg.n_env >= 2 && !cfg.ts.empty(), "need environments and times");
  if (cfg.x_over_t < 1.35 * cfg.lambda && !cfg.allow_out_of_regime)
    fail(ErrorCode::domain, "x/t below the proven regime; pass allow_out_of_regime");
  LdpResult out;
  out.config = cfg;
  const double a = cfg.lambda * cfg.epsilon;
  const double reference = -cfg.lambda * cfg.lambda * rate_function(cfg.x_over_t / cfg.lambda);
  const double overshoot = tail_overshoot(cfg.lambda, cfg.x_over_t, cfg.epsilon);
  for (size_t ti = 0; ti < cfg.ts.size(); ++ti) {
    const double t = cfg.ts[ti];
    require(t > 0.0, "times must be positive");
    LdpRow row;
    row.t = t;
    row.steps = steps_for(t, cfg.epsilon);
    row.threshold = static_cast<int64_t>(std::floor(cfg.x_over_t * t / cfg.epsilon));
    row.reference = reference;
    std::vector<double> logk(cfg.n_env);
    std::vector<uint64_t> clamps(cfg.n_env, 0);
    parallel_for(static_cast<size_t>(cfg.n_env), cfg.workers, [&](size_t i) {
      const Environment env(a, a, cfg.seed, (static_cast<uint64_t>(ti) << 32) | i);
      logk[i] = bridge_log_tail(env, 0, row.steps, static_cast<double>(row.threshold), cfg.band_c, overshoot, false);
      clamps[i] = env.clamp_count();
    });
    row.rates.resize(logk.size());
    for (size_t i = 0; i < logk.size(); ++i) row.rates[i] = logk[i] / t;
    row.mean = mean(row.rates);
    row.variance = sample_variance(row.rates);
    row.se = standard_error(row.rates);
    row.annealed = log_mean_exp(logk) / t;
    row.annealed_exact = srw_log_tail(row.steps, row.threshold) / t;
    for (uint64_t c : clamps) out.clamps += c;
    out.rows.push_back(std::move(row));
  }
  return out;
}

double normalize_log_kernel(const SaddleData& s, double t, double log_kernel) {
  return (log_kernel + s.lambda * s.lambda * s.J * t) / (std::cbrt(t) * s.sigma);
}

double unnormalize(const SaddleData& s, double t, double normalized) {
  return normalized * std::cbrt(t) * s.sigma - s.lambda * s.lambda * s.J * t;
}

FluctuationResult fluctuation_experiment(const FluctuationConfig& cfg) {
  require(cfg.lambda > 0.0 && cfg.t > 0.0, "lambda and t must be positive");
  require(cfg.epsilon > 0.0 && cfg.epsilon <= 0.2, "epsilon must lie in (0, 0.2]");
  require(cfg.n_env >= 2 && cfg.control_reps >= 0, "need environments");
  if (!(cfg.theta > 0.0 && cfg.theta < 1.0) && !cfg.allow_out_of_regime)
    fail(ErrorCode::domain, "theta outside (0, 1); pass allow_out_of_regime");
  FluctuationResult out;
  out.config = cfg;
  out.saddle = make_saddle(cfg.theta, cfg.lambda);
  out.steps = steps_for(cfg.t, cfg.epsilon);
  const double xt = out.saddle.x_of_theta * cfg.t;
  out.threshold = static_cast<int64_t>(std::floor(xt / cfg.epsilon));
  const double a = cfg.lambda * cfg.epsilon;
  const double overshoot = tail_overshoot(cfg.lambda, out.saddle.x_of_theta, cfg.epsilon);
  out.samples.resize(cfg.n_env);
  std::vector<uint64_t> clamps(cfg.n_env, 0);
  parallel_for(static_cast<size_t>(cfg.n_env), cfg.workers, [&](size_t i) {
    const Environment env(a, a, cfg.seed, i);
    FluctuationSample& s = out.samples[i];
    s.t = cfg.t;
    s.x_target = xt;
    s.log_kernel =
        bridge_log_tail(env, 0, out.steps, static_cast<double>(out.threshold), cfg.band_c, overshoot, false);
    s.normalized = normalize_log_kernel(out.saddle, cfg.t, s.log_kernel);
    clamps[i] = env.clamp_count();
  });
  for (uint64_t c : clamps) out.clamps += c;

  std::vector<double> z, logk;
  for (const auto& s : out.samples) {
    z.push_back(s.normalized);
    logk.push_back(s.log_kernel);
  }
  const KsResult ks = ks_one_sample(z, tracy_widom_cdf_fast);
  out.ks = ks.statistic;
  out.ks_p = ks.p_value;
  out.median = median(z);
  out.tw_median = tracy_widom_quantile(0.5);

  // Null control: Gaussian log-kernels with the sample's mean and variance.
  const double m = mean(logk), sd = std::sqrt(sample_variance(logk));
  const PhiloxKey key = derive_key(cfg.seed, 0);
  int wins = 0;
  for (int r = 0; r < cfg.control_reps; ++r) {
    CounterStream g(key, static_cast<uint32_t>(r), 0, Domain::control);
    std::vector<double> c(cfg.n_env);
    for (auto& v : c) v = normalize_log_kernel(out.saddle, cfg.t, m + sd * g.normal());
    out.control_ks.push_back(ks_one_sample(c, tracy_widom_cdf_fast).statistic);
    if (out.control_ks.back() > out.ks) ++wins;
  }
  out.control_win_fraction = cfg.control_reps > 0 ? static_cast<double>(wins) / cfg.control_reps : 0.0;
  return out;
}

double extremal_location(double lambda, double c) {
  require(lambda > 0.0 && c > 0.0, "lambda and c must be positive");
  const double target = c / (lambda * lambda);
  double lo = 1e-3, hi = 1.0;
  while (rate_function(hi) < target) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (rate_function(mid) < target ? lo : hi) = mid;
  }
  return lambda * 0.5 * (lo + hi);
}

int64_t max_quantile(const QuenchedKernel& k, double log_n, double u) {
  require(u > 0.0 && u < 1.0, "u must lie in (0, 1)");
  require(!k.masses.empty(), "empty kernel");
  // P(max <= r) >= u  <=>  log n + log(-log1p(-K(r))) <= log(-log u), K(r) = P(X > r).
  const double bound = std::log(-std::log(u));
  double sum = 0.0;
  int64_t best = k.x_max();
  for (size_t i = k.masses.size(); i-- > 0;) {
    const int64_t r = k.x_min + 2 * static_cast<int64_t>(i);
    if (sum > 0.0) {
      const double lk = std::log(sum) + k.log_scale;
      const double l = lk < -30.0 ? lk : std::log(-std::log1p(-std::exp(lk)));
      if (log_n + l > bound) break;
    }
    best = r;
    sum += k.masses[i];
  }
  return best;
}

ExtremalResult extremal_particle_experiment(const ExtremalConfig& cfg) {
  if (!(cfg.c >= 1.02)) fail(ErrorCode::domain, "c must be at least 1.02");
  require(cfg.t > 0.0 && cfg.n_env >= 1, "need t > 0 and environments");
  require(cfg.epsilon > 0.0 && cfg.epsilon <= 0.2, "epsilon must lie in (0, 0.2]");
  ExtremalResult out;
  out.config = cfg;
  out.x0 = extremal_location(cfg.lambda, cfg.c);
  out.theta0 = x_to_theta(out.x0, cfg.lambda);
  out.sigma0 = make_saddle(out.theta0, cfg.lambda).sigma;
  out.slope = cfg.lambda * rate_function_derivative(out.x0 / cfg.lambda);
  out.log_n = std::log(std::floor(std::exp(cfg.c * cfg.t)));
  const double scale = std::cbrt(cfg.t) * out.sigma0 / out.slope;
  const int64_t steps = steps_for(cfg.t, cfg.epsilon);
  const double y = out.x0 * cfg.t / cfg.epsilon;
  const double overshoot = std::max(tail_overshoot(cfg.lambda, out.x0, cfg.epsilon), 10.0 * scale / cfg.epsilon);
  const double a = cfg.lambda * cfg.epsilon;
  out.max_location.resize(cfg.n_env);
  out.normalized.resize(cfg.n_env);
  const PhiloxKey key = derive_key(cfg.seed, 0);
  parallel_for(static_cast<size_t>(cfg.n_env), cfg.workers, [&](size_t i) {
    const Environment env(a, a, cfg.seed, i);
    const BandResult r =
        band_forward(env, 0, steps, bridge_band(0, steps, y, cfg.band_c, overshoot), tilt_for_speed(y / steps));
    CounterStream g(key, static_cast<uint32_t>(i), 0, Domain::extremal);
    const int64_t m = max_quantile(r.kernel, out.log_n, g.uniform());
    out.max_location[i] = cfg.epsilon * static_cast<double>(m);
    out.normalized[i] = (out.max_location[i] - cfg.t * out.x0) / scale;
  });
  out.mean_over_t = mean(out.max_location) / cfg.t;
  return out;
}

}  // namespace sticky
