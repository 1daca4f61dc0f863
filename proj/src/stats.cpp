#include "sticky/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sticky/errors.hpp"
#include "sticky/fredholm.hpp"

namespace sticky {

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

double mean(const std::vector<double>& x) {
  require(!x.empty(), "mean of an empty sample");
  return pairwise_sum(x) / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x) {
  require(x.size() >= 2, "variance needs two samples");
  const double m = mean(x);
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = (x[i] - m) * (x[i] - m);
  return pairwise_sum(d) / static_cast<double>(x.size() - 1);
}

double standard_error(const std::vector<double>& x) {
  return std::sqrt(sample_variance(x) / static_cast<double>(x.size()));
}

double quantile(std::vector<double> x, double p) {
  require(!x.empty() && p >= 0.0 && p <= 1.0, "quantile needs data and p in [0, 1]");
  std::sort(x.begin(), x.end());
  const double h = p * static_cast<double>(x.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(h));
  if (i + 1 >= x.size()) return x.back();
  return x[i] + (h - static_cast<double>(i)) * (x[i + 1] - x[i]);
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

double log_mean_exp(const std::vector<double>& v) {
  require(!v.empty(), "log_mean_exp of an empty sample");
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  std::vector<double> e(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) e[i] = std::exp(v[i] - m);
  return m + std::log(pairwise_sum(e) / static_cast<double>(v.size()));
}

double kolmogorov_q(double z) {
  if (z < 0.2) return 1.0;
  if (z < 1.0) {
    // Dual Jacobi form converges fast for small z.
    const double c = std::sqrt(2.0 * M_PI) / z;
    double s = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const double a = (2 * k - 1) * M_PI / (2.0 * z);
      s += std::exp(-0.5 * a * a);
    }
    return 1.0 - c * s;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * z * z);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  require(!x.empty(), "KS of an empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double rn = std::sqrt(n);
  return {d, kolmogorov_q((rn + 0.12 + 0.11 / rn) * d)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "KS of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

namespace {

struct TwTable {
  static constexpr double lo = -8.0, hi = 6.0, h = 0.1;
  std::vector<double> f, df;
  TwTable() {
    const int n = static_cast<int>(std::lround((hi - lo) / h)) + 1;
    f.resize(n);
    df.resize(n);
    for (int i = 0; i < n; ++i) f[i] = tracy_widom_cdf(lo + h * i);
    // Slopes by fourth-order differences.
    for (int i = 0; i < n; ++i) {
      if (i >= 2 && i + 2 < n)
        df[i] = (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / (12 * h);
      else if (i == 0 || i + 1 == n)
        df[i] = 0.0;
      else
        df[i] = (f[i + 1] - f[i - 1]) / (2 * h);
    }
  }
  double operator()(double y) const {
    if (y <= lo) return 0.0;
    if (y >= hi) return 1.0;
    const double s = (y - lo) / h;
    const std::size_t i = std::min(static_cast<std::size_t>(s), f.size() - 2);
    const double u = s - static_cast<double>(i);
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    return std::clamp(h00 * f[i] + h10 * h * df[i] + h01 * f[i + 1] + h11 * h * df[i + 1], 0.0, 1.0);
  }
};

}  // namespace

double tracy_widom_cdf_fast(double y) {
  static const TwTable table;
  return table(y);
}

double tracy_widom_quantile_fast(double p) {
  require(p > 0.0 && p < 1.0, "p must lie in (0, 1)");
  double lo = -8.0, hi = 6.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (tracy_widom_cdf_fast(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace sticky
