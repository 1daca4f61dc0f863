#include "sticky/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sticky/errors.hpp"

namespace sticky {
namespace {

constexpr double kPi = 3.14159265358979323846;
const double kLogCut = std::log(1e14);
constexpr double kTailLimit = 1e-10;

struct Axis {
  std::vector<Complex> w;
  std::vector<Complex> f;  // quadrature weight times single-axis factor
  double l1 = 0.0;         // sum |f|
  double tail = 0.0;       // bound on the dropped |y| > cutoff mass
};

// Vertical line alpha + i y, y = scale sinh(tau), trapezoid in tau.
template <class F>
Axis line_axis(double alpha, double scale, double cutoff, int n, F&& factor) {
  Axis ax;
  ax.w.resize(n);
  ax.f.resize(n);
  const double tau_max = std::asinh(cutoff / scale);
  const double h = 2.0 * tau_max / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double tau = -tau_max + i * h;
    const double y = scale * std::sinh(tau);
    double wt = scale * std::cosh(tau) * h / (2.0 * kPi);
    if (i == 0 || i == n - 1) wt *= 0.5;
    ax.w[i] = Complex(alpha, y);
    ax.f[i] = wt * factor(ax.w[i]);
    ax.l1 += std::abs(ax.f[i]);
  }
  return ax;
}

inline Complex cmul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

// Iterated sum over axes with pairwise factors pair(w_a, w_b), a < b. Partial
// products are carried down the recursion so the cost is about prod N_j.
class NestedSum {
 public:
  template <class P>
  NestedSum(const std::vector<Axis>& axes, P&& pair) : axes_(axes) {
    const int k = static_cast<int>(axes_.size());
    table_.assign(k, std::vector<std::vector<Complex>>(k));
    cmax_ = 1.0;
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) {
        const auto& wa = axes_[a].w;
        const auto& wb = axes_[b].w;
        auto& tab = table_[a][b];
        tab.resize(wa.size() * wb.size());
        double m = 0.0;
        for (size_t i = 0; i < wa.size(); ++i)
          for (size_t j = 0; j < wb.size(); ++j) {
            const Complex c = pair(wa[i], wb[j]);
            tab[i * wb.size() + j] = c;
            m = std::max(m, std::abs(c));
          }
        cmax_ *= m;
      }
    q_.assign(k, std::vector<std::vector<Complex>>(k));
    for (int j = 0; j < k; ++j) {
      q_[0][j] = axes_[j].f;
      for (int l = 1; l <= j; ++l) q_[l][j].resize(axes_[j].f.size());
    }
  }

  Complex run() { return level(0); }
  double cross_bound() const { return cmax_; }

 private:
  Complex level(int lv) {
    const int k = static_cast<int>(axes_.size());
    const auto& cur = q_[lv][lv];
    if (lv == k - 1) return std::accumulate(cur.begin(), cur.end(), Complex(0.0));
    Complex total = 0.0;
    const size_t nl = cur.size();
    if (lv == k - 2) {
      const auto& src = q_[lv][k - 1];
      const size_t nb = src.size();
      for (size_t n = 0; n < nl; ++n) {
        const Complex* c = &table_[lv][k - 1][n * nb];
        double re = 0.0, im = 0.0;
        for (size_t m = 0; m < nb; ++m) {
          re += src[m].real() * c[m].real() - src[m].imag() * c[m].imag();
          im += src[m].real() * c[m].imag() + src[m].imag() * c[m].real();
        }
        total += cmul(cur[n], Complex(re, im));
      }
      return total;
    }
    for (size_t n = 0; n < nl; ++n) {
      for (int j = lv + 1; j < k; ++j) {
        const auto& src = q_[lv][j];
        auto& dst = q_[lv + 1][j];
        const size_t nb = src.size();
        const Complex* c = &table_[lv][j][n * nb];
        for (size_t m = 0; m < nb; ++m) dst[m] = cmul(src[m], c[m]);
      }
      total += cmul(cur[n], level(lv + 1));
    }
    return total;
  }

  const std::vector<Axis>& axes_;
  std::vector<std::vector<std::vector<Complex>>> table_;
  std::vector<std::vector<std::vector<Complex>>> q_;
  double cmax_ = 1.0;
};

double tail_certificate(const std::vector<Axis>& axes, double cross) {
  double total = 0.0;
  for (size_t j = 0; j < axes.size(); ++j) {
    double term = axes[j].tail;
    for (size_t i = 0; i < axes.size(); ++i)
      if (i != j) term *= axes[i].l1 + axes[i].tail;
    total += term;
  }
  return total * cross;
}

// integral_{y*}^inf exp(-a y^2 / 2) dy, both sides.
double gaussian_tails(double a, double ystar) {
  return 2.0 * std::sqrt(kPi / (2.0 * a)) * std::erfc(ystar * std::sqrt(a / 2.0));
}

// Distance from each line Re w = alpha_j to the nearest singularity of the
// moment integrand (1/w and the pair factors), measured along the real axis.
std::vector<double> pole_gaps(const std::vector<double>& al) {
  const size_t k = al.size();
  std::vector<double> gap(k);
  for (size_t j = 0; j < k; ++j) {
    double g = al[j];
    for (size_t b = j + 1; b < k; ++b) g = std::min(g, al[b] / (1.0 + al[b]) - al[j]);
    for (size_t a = 0; a < j; ++a) g = std::min(g, al[j] - al[a] / (1.0 - al[a]));
    gap[j] = g;
  }
  return gap;
}

std::vector<double> ladder_from_gap(int k, double g) {
  std::vector<double> al(k);
  al[0] = g;
  for (int i = 1; i < k; ++i) {
    const double c = al[i - 1] + g;
    if (c >= 1.0) return {};
    al[i] = c / (1.0 - c);
  }
  return al;
}

Complex flow_pair(Complex wa, Complex wb) { return (wb - wa) / (wb - wa - wa * wb); }

void validate_request(const MomentRequest& req, bool ordered) {
  require(req.k >= 1 && req.k <= kMaxMomentOrder, "moment order k must be in [1, " +
                                                      std::to_string(kMaxMomentOrder) + "]");
  require(std::isfinite(req.lambda) && req.lambda > 0.0, "lambda must be positive");
  require(std::isfinite(req.t) && req.t >= 0.0, "t must be nonnegative");
  require(static_cast<int>(req.xs.size()) == req.k, "xs must have k entries");
  for (double x : req.xs) require(std::isfinite(x), "xs must be finite");
  if (ordered)
    for (int i = 1; i < req.k; ++i) require(req.xs[i] <= req.xs[i - 1], "xs must be nonincreasing");
  require(std::isfinite(req.cutoff_scale) && req.cutoff_scale > 0.0, "cutoff_scale must be positive");
}

}  // namespace

std::vector<double> default_alphas(int k, double top) {
  require(k >= 1 && k <= kMaxMomentOrder, "k out of range");
  require(top > 0.0 && top <= 1.0, "ladder top must be in (0, 1]");
  if (k == 1) return {top};
  double lo = 0.0, hi = top / k;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    auto al = ladder_from_gap(k, mid);
    if (!al.empty() && al.back() <= top)
      lo = mid;
    else
      hi = mid;
  }
  return ladder_from_gap(k, lo);
}

std::vector<double> margin_alphas(int k) {
  require(k >= 1 && k <= kMaxMomentOrder, "k out of range");
  std::vector<double> al(k);
  al[k - 1] = 1.0;
  for (int j = k - 2; j >= 0; --j) al[j] = 0.9 * al[j + 1] / (1.0 + al[j + 1]);
  return al;
}

void check_nesting(const std::vector<double>& al) {
  for (double a : al)
    if (!(std::isfinite(a) && a > 0.0)) fail(ErrorCode::nesting, "contour abscissas must be positive");
  for (size_t i = 0; i < al.size(); ++i)
    for (size_t j = i + 1; j < al.size(); ++j)
      if (!(al[i] < al[j] / (1.0 + al[j])))
        fail(ErrorCode::nesting, "contour abscissas violate alpha_i < alpha_j / (1 + alpha_j) for i < j");
}

int default_moment_nodes(int k) {
  static const int table[] = {0, 200, 120, 64, 40, 32, 32, 18, 14};
  require(k >= 1 && k <= kMaxMomentOrder, "k out of range");
  return table[k];
}

Complex moment_integral(const MomentRequest& req, int nodes, double* tail_bound, double* cutoff) {
  validate_request(req, false);
  require(req.t > 0.0, "contour integral needs t > 0");
  const int k = req.k;
  const double a = req.t * req.lambda * req.lambda;
  const std::vector<double> al =
      req.alphas.empty() ? default_alphas(k, std::min(1.0, 1.0 / std::sqrt(a))) : req.alphas;
  require(static_cast<int>(al.size()) == k, "alphas must have k entries");
  check_nesting(al);
  if (nodes <= 0) nodes = default_moment_nodes(k);
  require(nodes >= 8, "nodes per axis must be >= 8");

  double log_peak = 0.0;
  for (int j = 0; j < k; ++j) log_peak = std::max(log_peak, 0.5 * a * al[j] * al[j] + req.lambda * req.xs[j] * al[j]);
  const double ystar = req.cutoff_scale * std::sqrt(2.0 * (kLogCut + log_peak) / a);
  if (cutoff) *cutoff = ystar;
  const auto gap = pole_gaps(al);
  std::vector<Axis> axes;
  axes.reserve(k);
  for (int j = 0; j < k; ++j) {
    const double lx = req.lambda * req.xs[j];
    const double scale = std::min(gap[j], ystar);
    axes.push_back(line_axis(al[j], scale, ystar, nodes, [&](Complex w) {
      return std::exp(0.5 * a * w * w + lx * w) / w;
    }));
    const double peak = std::exp(0.5 * a * al[j] * al[j] + lx * al[j]);
    axes.back().tail = peak / (2.0 * kPi * std::max(al[j], ystar)) * gaussian_tails(a, ystar);
  }
  NestedSum sum(axes, flow_pair);
  const Complex v = sum.run();
  if (tail_bound) *tail_bound = tail_certificate(axes, sum.cross_bound());
  return v;
}

MomentResult mixed_moment(const MomentRequest& req, int nodes) {
  validate_request(req, true);
  if (!req.alphas.empty()) {
    require(static_cast<int>(req.alphas.size()) == req.k, "alphas must have k entries");
    check_nesting(req.alphas);
  }
  if (nodes <= 0) nodes = default_moment_nodes(req.k);
  const int min_nodes = req.k <= 6 ? 32 : 12;
  require(nodes >= min_nodes, "too few nodes per axis");

  MomentResult out;
  out.nodes = nodes;
  Complex v;
  MomentRequest r = req;
  if (req.t == 0.0) {
    // t -> 0+ limit by one Richardson step from t = 1e-6 and 2e-6.
    double tb1 = 0.0, tb2 = 0.0;
    r.t = 1e-6;
    double cut = 0.0;
    const Complex v1 = moment_integral(r, nodes, &tb1, &cut);
    r.t = 2e-6;
    const Complex v2 = moment_integral(r, nodes, &tb2);
    v = 2.0 * v1 - v2;
    out.tail_bound = 2.0 * tb1 + tb2;
    out.t_zero_extrapolated = true;
    out.cutoffs.assign(req.k, cut);
  } else {
    double cut = 0.0;
    v = moment_integral(r, nodes, &out.tail_bound, &cut);
    out.cutoffs.assign(req.k, cut);
  }
  if (out.tail_bound > kTailLimit)
    fail(ErrorCode::truncation, "Gaussian tail bound " + std::to_string(out.tail_bound) + " exceeds 1e-10");
  out.imag = v.imag();
  double val = v.real();
  if (!(val >= -1e-8 && val <= 1.0 + 1e-8))
    fail(ErrorCode::numeric, "moment quadrature left [0, 1]: " + std::to_string(val));
  out.value = std::clamp(val, 0.0, 1.0);
  return out;
}

SeriesResult laplace_via_moments(double lambda, double t, double x, double u, int k_max, double tail_tol,
                                 int nodes) {
  require(std::isfinite(u), "u must be finite");
  require(k_max >= 0 && k_max <= kMaxMomentOrder, "k_max out of range");
  require(tail_tol > 0.0, "tail tolerance must be positive");
  SeriesResult out;
  if (u == 0.0) return out;

  double fact = 1.0, powu = 1.0, partial = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    fact *= k;
    powu *= std::abs(u);
    partial += powu / fact;
  }
  out.crude_bound = std::exp(std::abs(u)) * powu * std::abs(u) / (fact * (k_max + 1));

  double phi1 = 1.0;
  if (k_max >= 1) {
    MomentRequest r{1, lambda, t, {-x}, {}, 1.0};
    phi1 = mixed_moment(r, nodes > 0 ? std::max(nodes, 32) : 0).value;
  }
  out.remainder_bound = phi1 * std::max(0.0, std::exp(std::abs(u)) - partial);
  if (out.remainder_bound > tail_tol)
    fail(ErrorCode::tail, "series remainder bound " + std::to_string(out.remainder_bound) + " exceeds tolerance");

  double sum = 1.0, coef = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    coef *= u / k;
    double phi = phi1;
    if (k > 1) {
      MomentRequest r{k, lambda, t, std::vector<double>(k, -x), {}, 1.0};
      phi = mixed_moment(r, nodes).value;
    }
    out.terms.push_back(coef * phi);
    sum += coef * phi;
  }
  out.value = sum;
  return out;
}

Complex bethe_eigenfunction(const std::vector<Complex>& zs, const std::vector<double>& xs, double lambda,
                            BetheSign sign) {
  const int k = static_cast<int>(zs.size());
  require(k >= 1 && k <= kMaxMomentOrder, "number of spectral parameters out of range");
  require(static_cast<int>(xs.size()) == k, "xs must match zs");
  require(lambda > 0.0, "lambda must be positive");
  for (int i = 0; i < k; ++i) {
    if (zs[i] == 0.0) fail(ErrorCode::degenerate_state, "spectral parameter is zero");
    for (int j = i + 1; j < k; ++j)
      if (zs[i] == zs[j]) fail(ErrorCode::degenerate_state, "coincident spectral parameters");
  }
  const double s = sign == BetheSign::minus ? -1.0 : 1.0;
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  Complex total = 0.0;
  do {
    Complex term = 1.0;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        const Complex d = zs[perm[i]] - zs[perm[j]];
        term *= (d - 1.0) / d;
      }
    Complex ex = 0.0;
    for (int j = 0; j < k; ++j) ex += s * lambda * xs[j] / zs[perm[j]];
    total += term * std::exp(ex);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

double boundary_condition_residual(const std::function<Complex(double, double)>& f, double lambda, double x,
                                   double h) {
  static const double c[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
  Complex grid[5][5];
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) grid[i][j] = f(x + (i - 2) * h, x + (j - 2) * h);
  const double d = 12.0 * h;
  Complex d12 = 0.0, d1 = 0.0, d2 = 0.0;
  for (int i = 0; i < 5; ++i) {
    d1 += c[i] * grid[i][2];
    d2 += c[i] * grid[2][i];
    for (int j = 0; j < 5; ++j) d12 += c[i] * c[j] * grid[i][j];
  }
  return std::abs(d12 / (d * d) + lambda * (d1 - d2) / d);
}

double she_moment(int k, double t, const std::vector<double>& xs, double kappa, int nodes) {
  require(k >= 1 && k <= 3, "SHE moment order must be in [1, 3]");
  require(t > 0.0 && kappa > 0.0, "t and kappa must be positive");
  require(static_cast<int>(xs.size()) == k, "xs must have k entries");
  if (nodes <= 0) nodes = default_moment_nodes(k);
  const double g = 1.0 / std::sqrt(t);
  const double ystar = std::sqrt(2.0 * kLogCut / t);
  std::vector<Axis> axes;
  for (int j = 0; j < k; ++j) {
    const double r = (k - 1 - j) * (kappa + g);
    const double scale = std::min(g, ystar);
    const double x = xs[j];
    axes.push_back(line_axis(r, scale, ystar, nodes, [&](Complex z) { return std::exp(x * z + 0.5 * t * z * z); }));
  }
  NestedSum sum(axes, [kappa](Complex za, Complex zb) { return (za - zb) / (za - zb - kappa); });
  return sum.run().real();
}

KpzPair kpz_limit_moment(int k, double t, const std::vector<double>& xs, double kappa, double lambda_probe,
                         int nodes) {
  require(k >= 1 && k <= 3, "KPZ moment order must be in [1, 3]");
  require(t > 0.0 && kappa > 0.0, "t and kappa must be positive");
  require(lambda_probe >= 10.0, "lambda_probe must be >= 10");
  require(static_cast<int>(xs.size()) == k, "xs must have k entries");
  for (int i = 1; i < k; ++i) require(xs[i] >= xs[i - 1], "xs must be nondecreasing");
  if (nodes <= 0) nodes = default_moment_nodes(k);

  // Substituting w = gamma/lambda + z/lambda^2 in the moment integral at
  // T = lambda^2 t, X_i = lambda^2 t gamma + lambda x_i absorbs the prefactor
  // into exp(t z^2/2 - x z) * gamma / (lambda w).
  const double lam = lambda_probe, gam = std::sqrt(kappa), l2 = lam * lam;
  std::vector<double> al(k);
  al[0] = gam / lam;
  const double gz = 1.0 / std::sqrt(t);
  for (int j = 1; j < k; ++j) {
    const double c = al[j - 1] + gz / l2;
    require(c < 1.0, "lambda_probe too small for the contour ladder");
    al[j] = c / (1.0 - c);
  }
  check_nesting(al);
  const auto gap = pole_gaps(al);
  const double ystar = std::sqrt(2.0 * kLogCut / t);
  std::vector<Axis> axes;
  for (int j = 0; j < k; ++j) {
    const double r = (al[j] - gam / lam) * l2;
    const double scale = std::min(gap[j] * l2, ystar);
    const double x = xs[j];
    axes.push_back(line_axis(r, scale, ystar, nodes, [&](Complex z) {
      const Complex w = gam / lam + z / l2;
      return std::exp(0.5 * t * z * z - x * z) * gam / (lam * w);
    }));
  }
  NestedSum sum(axes, [&](Complex za, Complex zb) { return flow_pair(gam / lam + za / l2, gam / lam + zb / l2); });
  KpzPair out;
  out.flow = sum.run().real();
  out.she = she_moment(k, t, xs, kappa, nodes);
  return out;
}

}  // namespace sticky
