#include "sticky/rwre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "sticky/errors.hpp"

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

namespace sticky {
namespace {

// Flush denormals inside the recursions (far cone tails would otherwise run
// through microcoded arithmetic).
class FlushDenormals {
 public:
  FlushDenormals() {
#if defined(__SSE__)
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | 0x8040);
#endif
  }
  ~FlushDenormals() {
#if defined(__SSE__)
    _mm_setcsr(saved_);
#endif
  }

 private:
  unsigned saved_ = 0;
};

constexpr double kRescaleBelow = 1e-150;

double log_sum_scaled(double sum, double log_scale) {
  if (sum <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(sum) + log_scale;
}

template <class Fill>
BandResult run_band(const Fill& fill, int64_t start_x, int64_t steps, const BandFn& band, double tilt = 0.0) {
  FlushDenormals ftz;
  // Masses are carried as m(x) e^{tilt x}.
  const double up = std::exp(tilt), down = std::exp(-tilt);
  // Cell k at time s sits at x = start_x + 2k - s.
  std::vector<double> m(static_cast<size_t>(steps) + 2, 0.0), next(m.size(), 0.0);
  std::vector<double> w(m.size()), wb(m.size());
  int64_t klo = 0, khi = 0;
  m[0] = 1.0;
  double absorbed = 0.0, log_scale = 0.0;
  uint64_t cells = 0;
  for (int64_t s = 0; s < steps; ++s) {
    const size_t n = static_cast<size_t>(khi - klo + 1);
    fill(start_x + 2 * klo - s, s, n, w.data(), wb.data());
    cells += n;
    double* nx = next.data();
    const double* mm = m.data() + klo;
    double carry = 0.0;
    for (size_t i = 0; i < n; ++i) {
      nx[klo + static_cast<int64_t>(i)] = carry + mm[i] * (wb[i] * down);
      carry = mm[i] * (w[i] * up);
    }
    nx[khi + 1] = carry;
    int64_t lo = klo, hi = khi + 1;
    const RowBand b = band(s + 1);
    // x = start_x + 2k - (s + 1)  =>  k = (x - start_x + s + 1) / 2
    const int64_t klo_b = static_cast<int64_t>(std::ceil((b.lo - static_cast<double>(start_x) + s + 1) / 2.0));
    const int64_t khi_b = static_cast<int64_t>(std::floor((b.hi - static_cast<double>(start_x) + s + 1) / 2.0));
    while (lo < klo_b && lo <= hi) nx[lo++] = 0.0;
    while (hi > khi_b && hi >= lo) {
      if (b.absorb_above) absorbed += nx[hi];
      nx[hi--] = 0.0;
    }
    if (lo > hi) {
      // Everything left the band.
      klo = khi = std::max<int64_t>(0, std::min<int64_t>(klo_b, s + 1));
      nx[klo] = 0.0;
    } else {
      klo = lo;
      khi = hi;
    }
    std::swap(m, next);
    double mx = 0.0;
    for (int64_t k = klo; k <= khi; ++k) mx = std::max(mx, m[k]);
    if (mx > 0.0 && mx < kRescaleBelow) {
      const double inv = 1.0 / mx;
      for (int64_t k = klo; k <= khi; ++k) m[k] *= inv;
      absorbed *= inv;
      log_scale += std::log(mx);
    }
  }
  BandResult out;
  out.cells = cells;
  out.absorbed = absorbed;
  out.kernel.t = steps;
  out.kernel.x_min = start_x + 2 * klo - steps;
  out.kernel.masses.assign(m.begin() + klo, m.begin() + khi + 1);
  out.kernel.log_scale = log_scale;
  if (tilt != 0.0) {
    auto& ms = out.kernel.masses;
    std::vector<double> lm(ms.size(), -std::numeric_limits<double>::infinity());
    double top = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < ms.size(); ++i) {
      if (ms[i] <= 0.0) continue;
      lm[i] = std::log(ms[i]) - tilt * static_cast<double>(out.kernel.x_min + 2 * static_cast<int64_t>(i) - start_x);
      top = std::max(top, lm[i]);
    }
    for (size_t i = 0; i < ms.size(); ++i) ms[i] = std::exp(lm[i] - top);
    if (std::isfinite(top)) out.kernel.log_scale += top;
  }
  return out;
}

}  // namespace

double QuenchedKernel::mass(int64_t x) const {
  if (x < x_min || x > x_max() || ((x - x_min) & 1)) return 0.0;
  return masses[static_cast<size_t>((x - x_min) / 2)] * std::exp(log_scale);
}

double QuenchedKernel::total() const {
  double s = 0.0;
  for (double v : masses) s += v;
  return s * std::exp(log_scale);
}

BandResult band_forward(const Environment& env, int64_t start_x, int64_t steps, const BandFn& band, double tilt) {
  require(steps >= 0, "steps must be nonnegative");
  require(std::isfinite(tilt), "tilt must be finite");
  BandResult r = run_band(
      [&env](int64_t x, int64_t s, size_t n, double* w, double* wb) { env.fill(x, 2, s, n, w, wb); }, start_x,
      steps, band, tilt);
  if (tilt != 0.0 && r.absorbed != 0.0) fail(ErrorCode::invalid_argument, "absorbing bands need tilt = 0");
  return r;
}

BandFn cone_band(int64_t start_x) {
  return [start_x](int64_t s) {
    return RowBand{static_cast<double>(start_x - s), static_cast<double>(start_x + s), false};
  };
}

BandFn bridge_band(int64_t start_x, int64_t steps, double y, double c, double overshoot) {
  const double T = static_cast<double>(steps), x0 = static_cast<double>(start_x);
  return [=](int64_t s) {
    const double u = static_cast<double>(s);
    const double centre = x0 + (y - x0) * u / T;
    const double hw = c * std::sqrt(u * (T - u) / T) + overshoot * u / T + 4.0;
    return RowBand{centre - hw, centre + hw, false};
  };
}

BandFn target_band(int64_t start_x, int64_t steps, double y, double c) {
  const double T = static_cast<double>(steps), x0 = static_cast<double>(start_x);
  return [=](int64_t s) {
    const double u = static_cast<double>(s);
    const double fwd = c * std::sqrt(u) + 2.0, back = c * std::sqrt(T - u) + 2.0;
    const double lo = std::max(x0 - fwd, y - back);
    const double hi_f = x0 + fwd, hi_b = y + back;
    return hi_b <= hi_f ? RowBand{lo, hi_b, true} : RowBand{lo, hi_f, false};
  };
}

QuenchedKernel quenched_kernel(const EnvironmentGrid& env, int64_t t, int64_t start_x) {
  require(t >= 0, "t must be nonnegative");
  if (t > env.t_max()) fail(ErrorCode::window, "t exceeds the environment's t_max");
  if (start_x - t < env.x_lo() || start_x + t > env.x_hi())
    fail(ErrorCode::window, "walk could leave the environment window");
  auto r = run_band([&env](int64_t x, int64_t s, size_t n, double* w, double* wb) { env.fill(x, 2, s, n, w, wb); },
                    start_x, t, cone_band(start_x));
  return std::move(r.kernel);
}

double log_quenched_tail(const EnvironmentGrid& env, int64_t t, int64_t start_x, int64_t threshold, TailKind kind) {
  const QuenchedKernel k = quenched_kernel(env, t, start_x);
  const int64_t first = kind == TailKind::strict ? threshold + 1 : threshold;
  double sum = 0.0;
  for (size_t i = 0; i < k.masses.size(); ++i)
    if (k.x_min + 2 * static_cast<int64_t>(i) >= first) sum += k.masses[i];
  return log_sum_scaled(sum, k.log_scale);
}

double quenched_tail(const EnvironmentGrid& env, int64_t t, int64_t start_x, int64_t threshold, TailKind kind) {
  return std::exp(log_quenched_tail(env, t, start_x, threshold, kind));
}

double smoothed_tail(const QuenchedKernel& k, double y) { return std::exp(log_smoothed_tail(k, y)); }

double log_smoothed_tail(const QuenchedKernel& k, double y) {
  double sum = 0.0;
  for (size_t i = 0; i < k.masses.size(); ++i) {
    const double x = static_cast<double>(k.x_min + 2 * static_cast<int64_t>(i));
    sum += k.masses[i] * std::clamp((x - y + 1.0) / 2.0, 0.0, 1.0);
  }
  return log_sum_scaled(sum, k.log_scale);
}

Environment polymer_environment(double nu, double mu, uint64_t seed, uint64_t stream) {
  require(nu > mu && mu > 0.0, "polymer parameters need nu > mu > 0");
  return Environment(mu, nu - mu, seed, stream, Domain::polymer);
}

double polymer_partition(const Environment& env, int64_t t, int64_t n) {
  require(t >= 0, "t must be nonnegative");
  // Z(s, m) for m in [n - t, n]; row s only needs m >= n - t + s.
  const int64_t base = n - t;
  std::vector<double> z(static_cast<size_t>(t) + 1), b(z.size()), bb(z.size());
  for (int64_t j = 0; j <= t; ++j) z[j] = base + j > 0 ? 1.0 : 0.0;
  for (int64_t s = 1; s <= t; ++s) {
    const int64_t j0 = s;  // m = base + j
    const size_t cnt = static_cast<size_t>(t - j0 + 1);
    env.fill(base + j0, 1, s, cnt, b.data(), bb.data());
    for (int64_t j = t; j >= j0; --j) z[j] = b[j - j0] * z[j] + bb[j - j0] * z[j - 1];
  }
  return z[t];
}

int64_t steps_for(double t, double epsilon) {
  require(epsilon > 0.0 && t >= 0.0, "need epsilon > 0 and t >= 0");
  return static_cast<int64_t>(std::llround(t / (epsilon * epsilon)));
}

PathBundle sample_sticky_paths(double lambda, double epsilon, double t, int n, const std::vector<double>& x0s,
                               uint64_t seed) {
  require(lambda > 0.0, "lambda must be positive");
  require(epsilon > 0.0 && epsilon <= 0.2, "epsilon must lie in (0, 0.2]");
  require(n >= 1 && static_cast<size_t>(n) == x0s.size(), "need one start per walker");
  const Environment env(lambda * epsilon, lambda * epsilon, seed, 0);
  const PhiloxKey key = derive_key(seed, 0);
  PathBundle out;
  out.epsilon = epsilon;
  out.steps = steps_for(t, epsilon);
  std::map<int64_t, uint32_t> seen;
  std::vector<uint32_t> occurrence(n);
  for (int i = 0; i < n; ++i) {
    out.starts.push_back(2 * static_cast<int64_t>(std::llround(x0s[i] / (2.0 * epsilon))));
    occurrence[i] = seen[out.starts.back()]++;
  }
  out.paths.assign(n, std::vector<int64_t>(static_cast<size_t>(out.steps) + 1));
  for (int i = 0; i < n; ++i) {
    auto& p = out.paths[i];
    p[0] = out.starts[i];
    for (int64_t s = 0; s < out.steps; ++s) {
      const double w = env.weight(p[s], s);
      const auto c = philox4x32({static_cast<uint32_t>(out.starts[i]), occurrence[i], static_cast<uint32_t>(s),
                                 static_cast<uint32_t>(Domain::walker)},
                                key);
      p[s + 1] = p[s] + (to_unit(c[0], c[1]) < w ? 1 : -1);
    }
  }
  return out;
}

}  // namespace sticky
