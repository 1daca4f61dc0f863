#pragma once

#include <cstdint>
#include <vector>

#include "sticky/rwre.hpp"
#include "sticky/saddle.hpp"

namespace sticky {

// log P(X(steps) >= y) from start_x (atoms at y count with weight 1/2 when
// smoothed) along a bridge band of width band_c standard deviations, widened
// to y + overshoot at the end.
double bridge_log_tail(const Environment& env, int64_t start_x, int64_t steps, double y, double band_c,
                       double overshoot, bool smoothed, uint64_t* cells = nullptr);
// P(X(steps) >= y) with half weight on an atom at y, using the absorbing
// target band; suited to y within a few sqrt(steps) of start_x.
double target_tail(const Environment& env, int64_t start_x, int64_t steps, double y, double band_c,
                   uint64_t* cells = nullptr);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  int n = 0;
  uint64_t cells = 0;
  uint64_t clamps = 0;
};

struct LaplaceMcConfig {
  double lambda = 1.0, t = 1.0, x = 1.0, u = -1.0;
  double epsilon = 0.02;
  int n_env = 100000;
  uint64_t seed = 1;
  int workers = 1;
  double band_c = 5.0;
};
// E[exp(u K)] with K = P(X(t/eps^2) >= x/eps) in Beta(lambda eps, lambda eps).
McEstimate laplace_monte_carlo(const LaplaceMcConfig& cfg);

struct MomentMcConfig {
  double lambda = 1.0, t = 1.0;
  std::vector<double> xs;
  double epsilon = 0.02;
  int n_env = 10000;
  uint64_t seed = 1;
  int workers = 1;
  double band_c = 5.0;
};
// E[prod_j P_{x_j/eps}(X(t/eps^2) >= 0)], the discrete counterpart of the mixed moment.
McEstimate moment_monte_carlo(const MomentMcConfig& cfg);

struct LdpConfig {
  double lambda = 1.0;
  double x_over_t = 1.5;
  std::vector<double> ts{5.0, 10.0, 20.0};
  double epsilon = 0.05;
  int n_env = 200;
  uint64_t seed = 1;
  int workers = 1;
  bool allow_out_of_regime = false;
  double band_c = 6.0;
};

struct LdpRow {
  double t = 0.0;
  int64_t steps = 0, threshold = 0;
  std::vector<double> rates;  // (1/t) log K per environment
  double mean = 0.0, variance = 0.0, se = 0.0;
  double reference = 0.0;      // -lambda^2 J(x/lambda)
  double annealed = 0.0;       // (1/t) log of the environment-averaged K
  double annealed_exact = 0.0; // (1/t) log of the simple random walk tail
};

struct LdpResult {
  LdpConfig config;
  std::vector<LdpRow> rows;
  uint64_t clamps = 0;
};
LdpResult ldp_experiment(const LdpConfig& cfg);

struct FluctuationConfig {
  double lambda = 1.0;
  double theta = 0.5;
  double t = 50.0;
  double epsilon = 0.02;
  int n_env = 500;
  uint64_t seed = 1;
  int workers = 1;
  int control_reps = 20;
  bool allow_out_of_regime = false;
  double band_c = 5.0;
};

struct FluctuationSample {
  double t = 0.0, x_target = 0.0, log_kernel = 0.0, normalized = 0.0;
};

struct FluctuationResult {
  FluctuationConfig config;
  SaddleData saddle;
  int64_t steps = 0, threshold = 0;
  std::vector<FluctuationSample> samples;
  double ks = 0.0, ks_p = 0.0;
  double median = 0.0, tw_median = 0.0;
  std::vector<double> control_ks;
  double control_win_fraction = 0.0;  // share of controls with larger KS distance
  uint64_t clamps = 0;
};

double normalize_log_kernel(const SaddleData& s, double t, double log_kernel);
double unnormalize(const SaddleData& s, double t, double normalized);
FluctuationResult fluctuation_experiment(const FluctuationConfig& cfg);

struct ExtremalConfig {
  double lambda = 1.0;
  double c = 1.02;
  double t = 30.0;
  double epsilon = 0.05;
  int n_env = 100;
  uint64_t seed = 1;
  int workers = 1;
  double band_c = 6.0;
};

struct ExtremalResult {
  ExtremalConfig config;
  double x0 = 0.0, theta0 = 0.0, sigma0 = 0.0, slope = 0.0;  // slope = lambda J'(x0/lambda)
  double log_n = 0.0;                                      // log floor(e^{ct})
  std::vector<double> max_location;                        // continuum units
  std::vector<double> normalized;
  double mean_over_t = 0.0;
};

// x0 with lambda^2 J(x0/lambda) = c.
double extremal_location(double lambda, double c);
// Smallest lattice r in the kernel's support with (1 - P(X > r))^n >= u.
int64_t max_quantile(const QuenchedKernel& k, double log_n, double u);
ExtremalResult extremal_particle_experiment(const ExtremalConfig& cfg);

}  // namespace sticky
