#include "sticky/fredholm.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/airy.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sticky/errors.hpp"
#include "sticky/parallel.hpp"

namespace sticky {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPoleGuard = 1e-6;

double rwre_radius(const BetaRwreParams& p) {
  if (p.radius > 0.0) return p.radius;
  return std::min(0.25, 0.5 * (p.alpha + p.beta));
}

double outer_radius(const KernelSpec& spec) {
  return spec.family == KernelFamily::sticky_flow ? spec.sticky.radius : rwre_radius(spec.rwre);
}

Complex laplace_u(const KernelSpec& spec) {
  return spec.family == KernelFamily::sticky_flow ? spec.sticky.u : spec.rwre.u;
}

// log g(v); only differences of this quantity are ever exponentiated.
Complex log_g(const KernelSpec& spec, Complex v) {
  if (spec.family == KernelFamily::sticky_flow) {
    const auto& p = spec.sticky;
    return log_gamma(v) + p.lambda * p.x * polygamma(0, v) + 0.5 * p.lambda * p.lambda * p.t * polygamma(1, v);
  }
  const auto& p = spec.rwre;
  const double a = 0.5 * (p.t - p.x), b = 0.5 * (p.t + p.x);
  const Complex lv = log_gamma(v), la = log_gamma(p.alpha + v);
  Complex out = lv + a * (lv - la);
  if (b != 0.0) out += b * (log_gamma(p.alpha + p.beta + v) - la);
  return out;
}

// The s-integrand without the 1/(s + v - v') factor:
// pi / sin(pi s) * (-u)^s * g(v) / g(v+s).
Complex s_integrand(const KernelSpec& spec, Complex log_mu, Complex v, Complex lg_v, Complex s) {
  const Complex vs = v + s;
  if (vs.real() <= kPoleGuard && std::abs(vs - std::round(vs.real())) < kPoleGuard)
    fail(ErrorCode::pole_proximity, "kernel: v + s too close to a pole of Gamma");
  return kPi / std::sin(kPi * s) * std::exp(s * log_mu + lg_v - log_g(spec, vs));
}

struct InnerLine {
  Contour contour;
  double c = 0.5;
};

// Chooses the cutoff of the s-line from the observed decay of the integrand
// at the outer nodes.
InnerLine make_inner_line(const KernelSpec& spec, Complex log_mu, const std::vector<Complex>& vs,
                          const std::vector<Complex>& lgv) {
  InnerLine line;
  line.c = outer_radius(spec) + 0.5;
  auto profile = [&](double y) {
    double m = 0.0;
    const std::size_t stride = std::max<std::size_t>(1, vs.size() / 32);
    for (std::size_t i = 0; i < vs.size(); i += stride)
      for (double sgn : {-1.0, 1.0})
        m = std::max(m, std::abs(s_integrand(spec, log_mu, vs[i], lgv[i], Complex(line.c, sgn * y))));
    return m;
  };
  double peak = 0.0;
  for (double y : {0.0, 0.5, 1.0, 2.0}) peak = std::max(peak, profile(y));
  double Y = 16.0, tail = 0.0;
  for (; Y <= 200.0; Y += 4.0) {
    const double f0 = profile(Y), f1 = profile(Y + 2.0);
    const double rate = (f1 > 0.0 && f0 > 0.0) ? std::log(f0 / f1) / 2.0 : 10.0;
    if (rate > 0.5) {
      tail = 2.0 * f0 / rate;
      if (tail <= 1e-15 * std::max(1.0, peak)) break;
    }
  }
  if (Y > 200.0) fail(ErrorCode::non_convergence, "kernel: inner integrand does not decay");
  line.contour = vertical_line_contour(line.c, Y, spec.inner_nodes_per_panel);
  const double gap = line.c - 2.0 * outer_radius(spec);
  line.contour.tail_bound = tail / (2.0 * kPi * gap);
  return line;
}

void check_u(Complex u) {
  if (u.imag() == 0.0 && u.real() > 0.0) fail(ErrorCode::domain, "kernel: u must lie off the positive real axis");
  if (!std::isfinite(u.real()) || !std::isfinite(u.imag())) fail(ErrorCode::domain, "kernel: u must be finite");
}

DetReport contour_det(const KernelSpec& spec, int nodes_per_segment, int threads) {
  DetReport rep;
  rep.nodes_per_segment = nodes_per_segment;
  const Contour outer = outer_contour(spec, nodes_per_segment);
  const int n = static_cast<int>(outer.nodes.size());
  rep.nodes = n;
  const Complex u = laplace_u(spec);
  if (u == Complex(0.0, 0.0)) {
    rep.value = 1.0;
    rep.history.push_back(1.0);
    return rep;
  }
  const Complex log_mu = std::log(-u);
  std::vector<Complex> vs(n), lgv(n);
  parallel_for(n, threads, [&](std::size_t i) {
    vs[i] = outer.nodes[i].z;
    lgv[i] = log_g(spec, vs[i]);
  });
  const InnerLine line = make_inner_line(spec, log_mu, vs, lgv);
  rep.inner_cutoff = line.contour.cutoff;
  rep.inner_tail_bound = line.contour.tail_bound;
  const auto& sn = line.contour.nodes;
  const int M = static_cast<int>(sn.size());

  for (const auto& s : sn)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (std::abs(s.z + vs[i] - vs[j]) < kPoleGuard)
          fail(ErrorCode::pole_proximity, "kernel: inner node within 1e-6 of s = v' - v");

  std::vector<Complex> G(static_cast<std::size_t>(n) * M);
  parallel_for(n, threads, [&](std::size_t i) {
    for (int m = 0; m < M; ++m)
      G[i * M + m] = sn[m].w / Complex(0.0, 2.0 * kPi) * s_integrand(spec, log_mu, vs[i], lgv[i], sn[m].z);
  });
  std::vector<Complex> sq(n);
  for (int i = 0; i < n; ++i) sq[i] = std::sqrt(outer.nodes[i].w / Complex(0.0, 2.0 * kPi));
  std::vector<Complex> a(static_cast<std::size_t>(n) * n);
  parallel_for(n, threads, [&](std::size_t i) {
    for (int j = 0; j < n; ++j) {
      Complex k = 0.0;
      const Complex d = vs[i] - vs[j];
      for (int m = 0; m < M; ++m) k += G[i * M + m] / (sn[m].z + d);
      a[i * n + j] = (i == static_cast<std::size_t>(j) ? 1.0 : 0.0) - sq[i] * k * sq[j];
    }
  });
  const Complex det = lu_determinant(a, n, &rep.pivot_ratio);
  rep.value = det.real();
  rep.imag = det.imag();
  rep.history.push_back(rep.value);
  return rep;
}

// ---- Airy kernel -------------------------------------------------------

constexpr double kAiryVertex = 0.25;
constexpr double kAiryAngle = 5.0 * kPi / 12.0;

double ray_cutoff(Complex vertex, double phi, double sign, double xmin, double xmax) {
  // Exponent along the ray: Re(sign * (z^3/3 - z x)).
  double R = 1.0;
  for (double x : {xmin, xmax}) {
    double peak = -1e300;
    std::vector<double> e;
    for (int k = 0; k <= 800; ++k) {
      const Complex z = vertex + std::polar(k * 0.025, phi);
      e.push_back((sign * (z * z * z / 3.0 - z * x)).real());
      peak = std::max(peak, e.back());
    }
    for (int k = 800; k >= 0; --k)
      if (e[k] > peak - 45.0) {
        R = std::max(R, k * 0.025 + 0.5);
        break;
      }
  }
  return R;
}

struct AiryContours {
  Contour z, w;
};

AiryContours airy_contours(double xmin, double xmax, int nodes_per_panel) {
  AiryContours c;
  const Complex vz = kAiryVertex, vw = -kAiryVertex;
  const double rz = ray_cutoff(vz, kAiryAngle, 1.0, xmin, xmax);
  const double rw = ray_cutoff(vw, kPi - kAiryAngle, -1.0, xmin, xmax);
  c.z = ray_pair_contour(vz, kAiryAngle, rz, 1.0, nodes_per_panel);
  c.w = ray_pair_contour(vw, kPi - kAiryAngle, rw, 1.0, nodes_per_panel);
  return c;
}

// K(x_i, x_j) for all pairs through the factorization A C B^T of the double
// contour integral.
std::vector<double> airy_matrix(const std::vector<double>& xs, const AiryContours& c) {
  const std::size_t n = xs.size(), nz = c.z.nodes.size(), nw = c.w.nodes.size();
  std::vector<Complex> A(n * nz), B(n * nw), M(n * nw, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < nz; ++k) {
      const Complex z = c.z.nodes[k].z;
      A[i * nz + k] = c.z.nodes[k].w * std::exp(z * z * z / 3.0 - z * xs[i]);
    }
    for (std::size_t l = 0; l < nw; ++l) {
      const Complex w = c.w.nodes[l].z;
      B[i * nw + l] = c.w.nodes[l].w * std::exp(-w * w * w / 3.0 + w * xs[i]);
    }
  }
  std::vector<Complex> C(nz * nw);
  for (std::size_t k = 0; k < nz; ++k)
    for (std::size_t l = 0; l < nw; ++l) C[k * nw + l] = 1.0 / (c.z.nodes[k].z - c.w.nodes[l].z);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < nz; ++k) {
      const Complex a = A[i * nz + k];
      for (std::size_t l = 0; l < nw; ++l) M[i * nw + l] += a * C[k * nw + l];
    }
  std::vector<double> K(n * n);
  const double scale = -1.0 / (4.0 * kPi * kPi);  // 1 / (2 pi i)^2
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Complex s = 0.0;
      for (std::size_t l = 0; l < nw; ++l) s += M[i * nw + l] * B[j * nw + l];
      K[i * n + j] = scale * s.real();
    }
  return K;
}

double airy_upper_limit(double y) { return std::max(y, 0.0) + 10.0; }

DetReport airy_det(const KernelSpec& spec, int nodes_per_segment) {
  const double y = spec.airy.shift;
  const double b = airy_upper_limit(y);
  const int panels = static_cast<int>(std::ceil((b - y) / 2.5));
  const Contour seg = segment_contour(y, b, panels, nodes_per_segment);
  std::vector<double> xs, ws;
  for (const auto& q : seg.nodes) {
    xs.push_back(q.z.real());
    ws.push_back(q.w.real());
  }
  const AiryContours c = airy_contours(y, b, spec.inner_nodes_per_panel);
  const std::vector<double> K = airy_matrix(xs, c);
  const int n = static_cast<int>(xs.size());
  std::vector<Complex> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a[i * n + j] = (i == j ? 1.0 : 0.0) - std::sqrt(ws[i] * ws[j]) * K[i * n + j];
  DetReport rep;
  rep.nodes = n;
  rep.nodes_per_segment = nodes_per_segment;
  rep.inner_cutoff = std::max(c.z.cutoff, c.w.cutoff);
  const Complex det = lu_determinant(a, n, &rep.pivot_ratio);
  rep.value = det.real();
  rep.imag = det.imag();
  rep.history.push_back(rep.value);
  return rep;
}

}  // namespace

KernelSpec KernelSpec::sticky_flow(double lambda, double t, double x, Complex u, double radius) {
  KernelSpec s;
  s.family = KernelFamily::sticky_flow;
  s.sticky = {lambda, t, x, u, radius};
  return s;
}

KernelSpec KernelSpec::beta_rwre(double alpha, double beta, int t, int x, Complex u) {
  KernelSpec s;
  s.family = KernelFamily::beta_rwre;
  s.rwre = {alpha, beta, t, x, u, 0.0};
  return s;
}

KernelSpec KernelSpec::airy_kernel(double shift) {
  KernelSpec s;
  s.family = KernelFamily::airy;
  s.airy.shift = shift;
  return s;
}

void validate(const KernelSpec& spec) {
  require(spec.inner_nodes_per_panel >= 4, "kernel: inner_nodes_per_panel must be at least 4");
  switch (spec.family) {
    case KernelFamily::sticky_flow: {
      const auto& p = spec.sticky;
      require(p.lambda > 0.0 && p.t >= 0.0 && std::isfinite(p.x), "sticky kernel: need lambda > 0, t >= 0");
      require(p.radius > 0.0 && p.radius <= 0.25, "sticky kernel: radius must lie in (0, 1/4]");
      check_u(p.u);
      break;
    }
    case KernelFamily::beta_rwre: {
      const auto& p = spec.rwre;
      require(p.alpha > 0.0 && p.beta > 0.0, "beta-RWRE kernel: alpha, beta must be positive");
      require(p.t >= 0 && p.x >= -p.t && p.x <= p.t && ((p.t - p.x) % 2 == 0),
              "beta-RWRE kernel: x must lie in {-t..t} with the parity of t");
      const double r = rwre_radius(p);
      require(r > 0.0 && r < std::min({0.5, p.alpha + p.beta}), "beta-RWRE kernel: radius out of range");
      check_u(p.u);
      break;
    }
    case KernelFamily::airy:
      require(std::isfinite(spec.airy.shift), "Airy kernel: shift must be finite");
      break;
  }
}

Contour outer_contour(const KernelSpec& spec, int nodes_per_segment) {
  require(nodes_per_segment >= 8, "outer contour: nodes_per_segment must be at least 8");
  switch (spec.family) {
    case KernelFamily::sticky_flow: {
      const double r = spec.sticky.radius;
      return circle_contour(r, r, 8, nodes_per_segment, 1e-3);
    }
    case KernelFamily::beta_rwre:
      return circle_contour(0.0, rwre_radius(spec.rwre), 8, nodes_per_segment);
    case KernelFamily::airy: {
      const double y = spec.airy.shift, b = airy_upper_limit(y);
      return segment_contour(y, b, static_cast<int>(std::ceil((b - y) / 2.5)), nodes_per_segment);
    }
  }
  return {};
}

Complex kernel_eval(const KernelSpec& spec, Complex v, Complex vp) {
  validate(spec);
  if (spec.family == KernelFamily::airy) {
    const double x = v.real(), y = vp.real();
    const AiryContours c = airy_contours(std::min(x, y), std::max(x, y), spec.inner_nodes_per_panel);
    return airy_matrix({x, y}, c)[1];
  }
  const Complex u = laplace_u(spec);
  if (u == Complex(0.0, 0.0)) return 0.0;
  const Complex log_mu = std::log(-u);
  const Complex lgv = log_g(spec, v);
  const InnerLine line = make_inner_line(spec, log_mu, {v}, {lgv});
  Complex k = 0.0;
  for (const auto& s : line.contour.nodes) {
    const Complex den = s.z + v - vp;
    if (std::abs(den) < kPoleGuard) fail(ErrorCode::pole_proximity, "kernel: inner node within 1e-6 of s = v' - v");
    k += s.w / Complex(0.0, 2.0 * kPi) * s_integrand(spec, log_mu, v, lgv, s.z) / den;
  }
  return k;
}

DetReport nystrom_det(const KernelSpec& spec, int nodes_per_segment, int threads) {
  validate(spec);
  require(nodes_per_segment >= 8, "fredholm_det: nodes_per_segment must be at least 8");
  if (spec.family == KernelFamily::airy) return airy_det(spec, nodes_per_segment);
  return contour_det(spec, nodes_per_segment, threads);
}

DetReport fredholm_det(const KernelSpec& spec, const DetOptions& opts) {
  require(opts.tolerance > 0.0 && opts.max_doublings >= 0, "fredholm_det: bad options");
  int n = opts.nodes_per_segment;
  DetReport prev = nystrom_det(spec, n, opts.threads);
  std::vector<double> history = prev.history;
  for (int d = 0; d < opts.max_doublings; ++d) {
    n *= 2;
    DetReport cur = nystrom_det(spec, n, opts.threads);
    history.push_back(cur.value);
    cur.last_change = std::abs(cur.value - prev.value);
    cur.history = history;
    if (cur.last_change <= opts.tolerance) return cur;
    prev = cur;
  }
  fail(ErrorCode::non_convergence, "fredholm_det: node doubling did not reach the requested tolerance (last change " +
                                       std::to_string(prev.last_change) + ")");
}

DetReport laplace_transform(double lambda, double t, double x, double u, const DetOptions& opts, double radius) {
  require(u <= 0.0, "laplace_transform: u must be non-positive");
  require(t > 0.0, "laplace_transform: t must be positive");
  return fredholm_det(KernelSpec::sticky_flow(lambda, t, x, u, radius), opts);
}

DetReport beta_rwre_laplace(double alpha, double beta, int t, int x, double u, const DetOptions& opts) {
  require(u <= 0.0, "beta_rwre_laplace: u must be non-positive");
  require(t >= 0 && x >= -t && x <= t && (t - x) % 2 == 0, "beta_rwre_laplace: x must lie in {-t..t} with the parity of t");
  if (x == t) {
    DetReport r;
    r.history.push_back(1.0);
    return r;
  }
  return fredholm_det(KernelSpec::beta_rwre(alpha, beta, t, x + 2, u), opts);
}

double airy_kernel(double x, double y) { return kernel_eval(KernelSpec::airy_kernel(0.0), x, y).real(); }

double tracy_widom_cdf(double y) {
  require(!std::isnan(y), "tracy_widom_cdf: y is NaN");
  if (y > 10.0) return 1.0;
  if (y < -10.0) return 0.0;
  DetOptions opts;
  opts.nodes_per_segment = 12;
  opts.tolerance = 1e-9;
  opts.max_doublings = 2;
  const double v = fredholm_det(KernelSpec::airy_kernel(y), opts).value;
  return std::clamp(v, 0.0, 1.0);
}

double tracy_widom_sf(double y) {
  require(!std::isnan(y), "tracy_widom_sf: y is NaN");
  if (y < 0.0) return 1.0 - tracy_widom_cdf(y);
  using Rule = boost::math::quadrature::gauss<double, 40>;
  constexpr int m = 40;
  const double half = 8.0;
  std::vector<double> x(m), sw(m), ai(m), aip(m);
  const auto& abs = Rule::abscissa();
  const auto& wts = Rule::weights();
  for (int i = 0; i < m; ++i) {
    // Rule stores the nonnegative half of a symmetric rule.
    const int k = i < m / 2 ? m / 2 - 1 - i : i - m / 2;
    const double z = i < m / 2 ? -abs[k] : abs[k];
    x[i] = y + half * (1.0 + z);
    sw[i] = std::sqrt(half * wts[k]);
    ai[i] = boost::math::airy_ai(x[i]);
    aip[i] = boost::math::airy_ai_prime(x[i]);
  }
  std::vector<double> a(m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double k = i == j ? aip[i] * aip[i] - x[i] * ai[i] * ai[i]
                              : (ai[i] * aip[j] - aip[i] * ai[j]) / (x[i] - x[j]);
      a[i * m + j] = sw[i] * k * sw[j];
    }
  std::vector<double> p = a, next(m * m);
  double logdet = 0.0;
  for (int n = 1; n <= 200; ++n) {
    double tr = 0.0;
    for (int i = 0; i < m; ++i) tr += p[i * m + i];
    logdet -= tr / n;
    if (std::abs(tr) < 1e-18 * std::abs(logdet)) break;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double s = 0.0;
        for (int l = 0; l < m; ++l) s += p[i * m + l] * a[l * m + j];
        next[i * m + j] = s;
      }
    std::swap(p, next);
  }
  return -std::expm1(logdet);
}

double tracy_widom_quantile(double p) {
  require(p > 0.0 && p < 1.0, "tracy_widom_quantile: p must lie in (0, 1)");
  // Illinois regula falsi on F(y) - p over [-10, 10].
  double a = -10.0, b = 10.0;
  double fa = tracy_widom_cdf(a) - p, fb = tracy_widom_cdf(b) - p;
  int side = 0;
  for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
    double c = (a * fb - b * fa) / (fb - fa);
    if (!(c > a && c < b)) c = 0.5 * (a + b);
    const double fc = tracy_widom_cdf(c) - p;
    if (fc == 0.0) return c;
    if ((fc > 0.0) == (fb > 0.0)) {
      b = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
    if (std::abs(fc) < 1e-13) return c;
  }
  return 0.5 * (a + b);
}

Complex lu_determinant(std::vector<Complex>& a, int n, double* pivot_ratio) {
  Complex det = 1.0;
  double umax = 0.0, umin = 1e300;
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(a[k * n + k]);
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > best) {
        best = std::abs(a[i * n + k]);
        p = i;
      }
    if (best == 0.0) {
      if (pivot_ratio) *pivot_ratio = std::numeric_limits<double>::infinity();
      return 0.0;
    }
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
      det = -det;
    }
    const Complex piv = a[k * n + k];
    det *= piv;
    umax = std::max(umax, best);
    umin = std::min(umin, best);
    for (int i = k + 1; i < n; ++i) {
      const Complex f = a[i * n + k] / piv;
      if (f == Complex(0.0, 0.0)) continue;
      for (int j = k + 1; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
    }
  }
  if (pivot_ratio) *pivot_ratio = n > 0 ? umax / umin : 1.0;
  return det;
}

}  // namespace sticky
