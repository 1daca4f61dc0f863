#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "sticky/environment.hpp"

namespace sticky {

// Quenched law of X(t) given the environment. masses[i] is the mass at
// x_min + 2 i, scaled by exp(log_scale).
struct QuenchedKernel {
  int64_t t = 0;
  int64_t x_min = 0;
  std::vector<double> masses;
  double log_scale = 0.0;

  int64_t x_max() const { return x_min + 2 * (static_cast<int64_t>(masses.size()) - 1); }
  double mass(int64_t x) const;
  double total() const;
  bool log_domain() const { return log_scale != 0.0; }
};

enum class TailKind { strict, inclusive };

// Exact forward recursion m_{s+1}(x) = m_s(x-1) w_(x-1,s) + m_s(x+1) (1 - w_(x+1,s)).
QuenchedKernel quenched_kernel(const EnvironmentGrid& env, int64_t t, int64_t start_x);
double quenched_tail(const EnvironmentGrid& env, int64_t t, int64_t start_x, int64_t threshold,
                     TailKind kind = TailKind::strict);
// log of the tail; stays finite when the tail underflows binary64.
double log_quenched_tail(const EnvironmentGrid& env, int64_t t, int64_t start_x, int64_t threshold,
                         TailKind kind = TailKind::strict);

// Tail with each atom spread uniformly over [x-1, x+1]: sum m(x) clamp((x - y + 1)/2, 0, 1).
double smoothed_tail(const QuenchedKernel& k, double y);
double log_smoothed_tail(const QuenchedKernel& k, double y);

// Beta polymer with B ~ Beta(mu, nu - mu); its environment is an independent
// Environment in the polymer domain.
Environment polymer_environment(double nu, double mu, uint64_t seed, uint64_t stream);
// Z(t, n) with Z(0, n) = 1{n > 0}; B_{s,m} is env.weight(m, s).
double polymer_partition(const Environment& env, int64_t t, int64_t n);

// Row bounds for the band recursion: cells outside [lo, hi] at time s are
// removed; those leaving above hi are counted as absorbed when absorb_above.
struct RowBand {
  double lo, hi;
  bool absorb_above;
};
using BandFn = std::function<RowBand(int64_t s)>;

struct BandResult {
  QuenchedKernel kernel;   // final row, same scale as absorbed
  double absorbed = 0.0;   // scaled by exp(kernel.log_scale)
  uint64_t cells = 0;
};

// With tilt != 0 the recursion runs on m(x) e^{tilt (x - start_x)}, which keeps
// mass near a line of slope tanh(tilt) representable; the result is untilted.
BandResult band_forward(const Environment& env, int64_t start_x, int64_t steps, const BandFn& band,
                        double tilt = 0.0);
// Tilt that centres the walk on speed v.
inline double tilt_for_speed(double v) { return std::atanh(std::clamp(v, -0.999999, 0.999999)); }

// Band around the straight line from (0, start_x) to (steps, y): half-width
// c sqrt(s (steps - s) / steps) + overshoot s / steps + 4.
BandFn bridge_band(int64_t start_x, int64_t steps, double y, double c, double overshoot);
// Cells within c sqrt(s) of start and c sqrt(steps - s) of y; mass above the
// second window is absorbed.
BandFn target_band(int64_t start_x, int64_t steps, double y, double c);
// Full light cone.
BandFn cone_band(int64_t start_x);

struct PathBundle {
  double epsilon = 0.0;
  int64_t steps = 0;
  std::vector<int64_t> starts;                // lattice
  std::vector<std::vector<int64_t>> paths;    // lattice positions, steps + 1 per walker
  double position(size_t walker, int64_t s) const { return epsilon * static_cast<double>(paths[walker][s]); }
  double time(int64_t s) const { return epsilon * epsilon * static_cast<double>(s); }
};

// n walkers in one Beta(lambda eps, lambda eps) environment. Starting points
// are rounded to the even sublattice. The coin of a walker at time s is keyed
// by (start, occurrence of that start among earlier walkers, s).
PathBundle sample_sticky_paths(double lambda, double epsilon, double t, int n, const std::vector<double>& x0s,
                               uint64_t seed);
int64_t steps_for(double t, double epsilon);

}  // namespace sticky
