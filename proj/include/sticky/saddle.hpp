#pragma once

#include <vector>

#include "sticky/specfun.hpp"

namespace sticky {

// Constants of the double critical point of h. J is kept in the lambda = 1
// normalization: callers form lambda^2 * J themselves.
struct SaddleData {
  double lambda = 1.0;
  double theta = 1.0;
  double x_of_theta = 0.0;
  double J = 0.0;
  double sigma = 0.0;
  bool in_proven_regime = true;  // 0 < theta < 1
};

constexpr double kThetaMin = 1e-6;
constexpr double kThetaMax = 1e6;

double theta_to_x(double theta, double lambda);
double x_to_theta(double x, double lambda);

// J(x) = max_{theta>0} psi_2(theta)/2 + x psi_1(theta).
double rate_function(double x);
// dJ/dx = psi_1(theta(x)).
double rate_function_derivative(double x);

SaddleData make_saddle(double theta, double lambda);

// h(z) = lambda^2 J z - lambda^2/2 psi_1(z) - lambda x psi_0(z) and its
// derivatives up to order 4.
Complex h_eval(Complex z, const SaddleData& s, int order);

struct SteepDescentReport {
  std::vector<double> y;
  std::vector<double> slope;  // d/dy Re h(theta + i y)
  std::vector<std::size_t> offending;
  bool all_negative = true;
};

SteepDescentReport verify_steep_descent(const SaddleData& s, const std::vector<double>& y_grid);

// u_t(y) = -exp(t lambda^2 J - t^{1/3} sigma y).
double probe_u(const SaddleData& s, double t, double y);

}  // namespace sticky
