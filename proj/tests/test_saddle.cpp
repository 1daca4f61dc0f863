#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>

#include "doctest.h"
#include "sticky/errors.hpp"
#include "sticky/saddle.hpp"

using namespace sticky;

namespace {

// psi_n(t) = (-1)^{n+1} n! sum_k (t+k)^{-(n+1)}, summed directly with an
// Euler-Maclaurin tail.
long double series_polygamma(int n, long double t) {
  const long N = 200000;
  long double sum = 0;
  for (long k = N - 1; k >= 0; --k) sum += std::pow(t + k, -(n + 1.0L));
  const long double e = t + N;
  sum += std::pow(e, -static_cast<long double>(n)) / n + 0.5L * std::pow(e, -(n + 1.0L)) +
         (n + 1.0L) / 12.0L * std::pow(e, -(n + 2.0L));
  long double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return (n % 2 == 1 ? 1.0L : -1.0L) * f * sum;
}

double boost_objective(double theta, double x) {
  return 0.5 * boost::math::polygamma(2, theta) + x * boost::math::polygamma(1, theta);
}

}  // namespace

TEST_CASE("anchor values at theta = 1") {
  const double z3 = boost::math::zeta(3.0), z4 = boost::math::zeta(4.0);
  const double x1 = theta_to_x(1.0, 1.0);
  CHECK(std::abs(x1 - 1.5 * z4 / z3) < 1e-13);
  CHECK(std::abs(x1 - 1.3507) <= 1e-3);
  CHECK(std::abs(rate_function(x1) - 1.02) <= 1e-2);
  CHECK(std::abs(x_to_theta(x1, 1.0) - 1.0) < 1e-9);
}

TEST_CASE("theta_to_x at theta = 0.5 against the series oracle") {
  const long double p2 = series_polygamma(2, 0.5L), p3 = series_polygamma(3, 0.5L);
  const double want = static_cast<double>(-0.5L * p3 / p2);
  CHECK(std::abs(theta_to_x(0.5, 1.0) - want) < 1e-11 * want);
}

TEST_CASE("theta_to_x scales linearly in lambda") {
  for (double th : {0.2, 0.9, 3.0}) CHECK(std::abs(theta_to_x(th, 2.0) - 2.0 * theta_to_x(th, 1.0)) < 1e-12);
}

TEST_CASE("rate_function at x = 2 against a grid search") {
  double best = -1e300;
  const int n = 1000000;
  for (int i = 0; i <= n; ++i) {
    const double th = 1e-4 + (50.0 - 1e-4) * i / n;
    best = std::max(best, boost_objective(th, 2.0));
  }
  CHECK(std::abs(rate_function(2.0) - best) < 1e-8);
}

TEST_CASE("x_to_theta round trip and grid oracle") {
  for (double th : {0.3, 1.0, 2.5}) CHECK(std::abs(x_to_theta(theta_to_x(th, 1.0), 1.0) - th) < 1e-9);
  for (double th : {0.05, 0.7, 40.0}) {
    const double x = theta_to_x(th, 1.0);
    CHECK(std::abs(theta_to_x(x_to_theta(x, 1.0), 1.0) - x) < 1e-10);
  }
  // Monotone scan for x = 3 with Boost polygammas.
  double prev_th = 1e-3;
  for (int i = 1; i <= 200000; ++i) {
    const double th = 1e-3 + 2.0 * i / 200000;
    const double x = -0.5 * boost::math::polygamma(3, th) / boost::math::polygamma(2, th);
    if (x < 3.0) {
      CHECK(std::abs(x_to_theta(3.0, 1.0) - 0.5 * (th + prev_th)) < 1e-5);
      break;
    }
    prev_th = th;
  }
}

TEST_CASE("saddle identities") {
  for (double th : {0.3, 0.7, 1.0}) {
    const SaddleData s = make_saddle(th, 1.0);
    CHECK(std::abs(h_eval(th, s, 1)) <= 1e-9);
    CHECK(std::abs(h_eval(th, s, 2)) <= 1e-8);
    CHECK(std::abs(h_eval(th, s, 3) - 2.0 * std::pow(s.sigma, 3)) <= 1e-8);
    // Same data assembled from the public rate function and theta_to_x.
    SaddleData r = s;
    r.x_of_theta = theta_to_x(th, 1.0);
    r.J = rate_function(r.x_of_theta);
    CHECK(std::abs(h_eval(th, r, 1)) <= 1e-9);
    CHECK(std::abs(h_eval(th, r, 2)) <= 1e-8);
  }
  for (double lambda : {0.5, 3.0}) {
    const SaddleData s = make_saddle(0.6, lambda);
    CHECK(std::abs(s.J - rate_function(s.x_of_theta / lambda)) < 1e-10);
    CHECK(std::abs(h_eval(0.6, s, 1)) <= 1e-9 * lambda * lambda);
    CHECK(std::abs(h_eval(0.6, s, 3) - 2.0 * std::pow(s.sigma, 3)) <= 1e-8 * lambda * lambda);
  }
}

TEST_CASE("reference constants at theta = 0.5") {
  const SaddleData s = make_saddle(0.5, 1.0);
  const double z3 = boost::math::zeta(3.0), z5 = boost::math::zeta(5.0);
  const double pi4 = std::pow(M_PI, 4);
  CHECK(std::abs(s.x_of_theta - 0.5 * pi4 / (14.0 * z3)) < 1e-12);
  const double sigma3 = 0.5 * (0.5 * 744.0 * z5 - s.x_of_theta * pi4);
  CHECK(std::abs(std::pow(s.sigma, 3) - sigma3) < 1e-10);
  CHECK(s.in_proven_regime);
  CHECK_FALSE(make_saddle(1.5, 1.0).in_proven_regime);
}

TEST_CASE("h derivatives against finite differences") {
  const SaddleData s = make_saddle(0.5, 1.3);
  const Complex z(0.5, 0.5);
  const double h = 1e-5;
  for (int k = 0; k < 4; ++k) {
    const Complex d = (h_eval(z + h, s, k) - h_eval(z - h, s, k)) / (2.0 * h);
    CHECK(std::abs(d - h_eval(z, s, k + 1)) < 1e-7 * std::abs(h_eval(z, s, k + 1)) + 1e-9);
  }
}

TEST_CASE("h''' positive") {
  for (int i = 1; i <= 200; ++i) {
    const double th = 0.02 * i;
    const SaddleData s = make_saddle(th, 1.0);
    REQUIRE(h_eval(th, s, 3).real() > 0.0);
  }
}

TEST_CASE("steep descent along the vertical line") {
  const SaddleData s = make_saddle(0.5, 1.0);
  const auto rep = verify_steep_descent(s, {0.1, 1.0, 10.0});
  CHECK(rep.all_negative);
  CHECK(rep.offending.empty());
  const auto up = verify_steep_descent(s, {0.3, 2.0, 7.0});
  const auto down = verify_steep_descent(s, {-0.3, -2.0, -7.0});
  for (int i = 0; i < 3; ++i) CHECK(std::abs(up.slope[i] + down.slope[i]) < 1e-12 * std::abs(up.slope[i]));
  CHECK_FALSE(down.all_negative);
  CHECK(down.offending.size() == 3);

  const SaddleData s2 = make_saddle(2.0, 1.0);
  const double y = 0.01, d = 1e-5;
  const double fd = (h_eval(Complex(2.0, y + d), s2, 0).real() - h_eval(Complex(2.0, y - d), s2, 0).real()) / (2 * d);
  const auto r2 = verify_steep_descent(s2, {y});
  CHECK((fd < 0) == (r2.slope[0] < 0));
  CHECK(std::abs(fd - r2.slope[0]) < 1e-10);
  std::vector<double> grid;
  for (int i = 1; i <= 300; ++i) grid.push_back(0.01 * i * i);
  for (double th : {0.1, 0.5, 0.9}) CHECK(verify_steep_descent(make_saddle(th, 1.0), grid).all_negative);
}

TEST_CASE("monotonicity and strong disorder") {
  double prev_x = 1e300, prev_j = -1e300;
  for (int i = 1; i <= 100; ++i) {
    const double th = 0.05 * i;
    const double x = theta_to_x(th, 1.0);
    CHECK(x < prev_x);
    prev_x = x;
  }
  for (int i = 0; i <= 99; ++i) {
    const double x = 0.1 + 0.1 * i;
    const double j = rate_function(x);
    CHECK(j > prev_j);
    CHECK(j > 0.5 * x * x);
    prev_j = j;
  }
}

TEST_CASE("lambda covariance of the exponent") {
  auto exponent = [](double lambda, double x) { return lambda * lambda * rate_function(x / lambda); };
  for (double x : {0.7, 1.5, 4.0}) CHECK(std::abs(exponent(2.0, 2.0 * x) - 4.0 * exponent(1.0, x)) < 1e-10);
}

TEST_CASE("rate function derivative two ways") {
  for (double x : {0.5, 1.3507, 2.0, 5.0}) {
    const double h = 1e-5;
    const double fd = (rate_function(x + h) - rate_function(x - h)) / (2 * h);
    CHECK(std::abs(fd - rate_function_derivative(x)) < 1e-6);
  }
}

TEST_CASE("probe parameter") {
  const SaddleData s = make_saddle(0.5, 1.0);
  CHECK(probe_u(s, 8.0, 0.0) == doctest::Approx(-std::exp(8.0 * s.J)).epsilon(1e-14));
  CHECK(probe_u(s, 8.0, 1.0) == doctest::Approx(-std::exp(8.0 * s.J - 2.0 * s.sigma)).epsilon(1e-14));
}

TEST_CASE("saddle domain errors") {
  CHECK_THROWS_AS(rate_function(0.0), Error);
  CHECK_THROWS_AS(theta_to_x(-1.0, 1.0), Error);
  CHECK_THROWS_AS(x_to_theta(1e9, 1.0), Error);
  CHECK_THROWS_AS(h_eval(-2.0, make_saddle(0.5, 1.0), 0), Error);
}
