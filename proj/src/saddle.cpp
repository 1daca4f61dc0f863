#include "sticky/saddle.hpp"

#include <cmath>

#include "sticky/errors.hpp"

namespace sticky {
namespace {

double psi(int m, double x) { return polygamma(m, x).real(); }

}  // namespace

double theta_to_x(double theta, double lambda) {
  if (!(theta > 0.0)) fail(ErrorCode::domain, "theta_to_x: theta must be positive");
  require(lambda > 0.0, "theta_to_x: lambda must be positive");
  return -0.5 * lambda * psi(3, theta) / psi(2, theta);
}

double x_to_theta(double x, double lambda) {
  if (!(x > 0.0) || !std::isfinite(x)) fail(ErrorCode::domain, "x_to_theta: x must be positive");
  require(lambda > 0.0, "x_to_theta: lambda must be positive");
  // theta_to_x decreases from +inf to 0; bisect in log(theta).
  double lo = std::log(kThetaMin);
  double hi = std::log(kThetaMax);
  if (theta_to_x(kThetaMin, lambda) < x || theta_to_x(kThetaMax, lambda) > x)
    fail(ErrorCode::non_convergence, "x_to_theta: root not bracketed in [1e-6, 1e6]");
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (theta_to_x(std::exp(mid), lambda) > x)
      lo = mid;
    else
      hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double rate_function(double x) {
  if (!(x > 0.0)) fail(ErrorCode::domain, "rate_function: x must be positive");
  const double theta = x_to_theta(x, 1.0);
  return 0.5 * psi(2, theta) + x * psi(1, theta);
}

double rate_function_derivative(double x) {
  if (!(x > 0.0)) fail(ErrorCode::domain, "rate_function_derivative: x must be positive");
  return psi(1, x_to_theta(x, 1.0));
}

SaddleData make_saddle(double theta, double lambda) {
  if (!(theta > 0.0)) fail(ErrorCode::domain, "make_saddle: theta must be positive");
  require(lambda > 0.0, "make_saddle: lambda must be positive");
  SaddleData s;
  s.lambda = lambda;
  s.theta = theta;
  const double p1 = psi(1, theta), p2 = psi(2, theta), p3 = psi(3, theta), p4 = psi(4, theta);
  s.x_of_theta = -0.5 * lambda * p3 / p2;
  const double r = s.x_of_theta / lambda;
  s.J = 0.5 * p2 + r * p1;
  s.sigma = std::cbrt(lambda * lambda * (-0.5 * p4 - r * p3) / 2.0);
  s.in_proven_regime = theta < 1.0;
  return s;
}

Complex h_eval(Complex z, const SaddleData& s, int order) {
  require(order >= 0 && order <= 4, "h_eval: order must lie in [0, 4]");
  const double l2 = s.lambda * s.lambda;
  const double lx = s.lambda * s.x_of_theta;
  Complex v = -0.5 * l2 * polygamma(order + 1, z) - lx * polygamma(order, z);
  if (order == 0) v += l2 * s.J * z;
  if (order == 1) v += l2 * s.J;
  return v;
}

SteepDescentReport verify_steep_descent(const SaddleData& s, const std::vector<double>& y_grid) {
  require(!y_grid.empty(), "verify_steep_descent: empty grid");
  SteepDescentReport rep;
  rep.y = y_grid;
  rep.slope.reserve(y_grid.size());
  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    const double y = y_grid[i];
    const double d = -h_eval(Complex(s.theta, y), s, 1).imag();
    rep.slope.push_back(d);
    if (!(d < 0.0)) {
      rep.all_negative = false;
      rep.offending.push_back(i);
    }
  }
  return rep;
}

double probe_u(const SaddleData& s, double t, double y) {
  require(t > 0.0, "probe_u: t must be positive");
  return -std::exp(t * s.lambda * s.lambda * s.J - std::cbrt(t) * s.sigma * y);
}

}  // namespace sticky
