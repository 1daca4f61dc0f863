#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sticky/errors.hpp"
#include "sticky/specfun.hpp"

using sticky::Complex;
using sticky::log_gamma;
using sticky::polygamma;

namespace {

using Mp = boost::multiprecision::cpp_bin_float_50;

struct MpComplex {
  Mp re, im;
};
MpComplex operator+(const MpComplex& a, const MpComplex& b) { return {a.re + b.re, a.im + b.im}; }
MpComplex operator-(const MpComplex& a, const MpComplex& b) { return {a.re - b.re, a.im - b.im}; }
MpComplex operator*(const MpComplex& a, const MpComplex& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
MpComplex inverse(const MpComplex& a) {
  Mp d = a.re * a.re + a.im * a.im;
  return {a.re / d, -a.im / d};
}
MpComplex mp_log(const MpComplex& a) {
  return {log(sqrt(a.re * a.re + a.im * a.im)), atan2(a.im, a.re)};
}

// 50-digit oracle: shift until Re z >= 40, then 30 Stirling terms.
Complex oracle_log_gamma(Complex z0) {
  MpComplex z{Mp(z0.real()), Mp(z0.imag())};
  MpComplex shift{0, 0};
  const int steps = 40 + static_cast<int>(std::max(0.0, -z0.real()));
  for (int k = 0; k < steps; ++k) {
    shift = shift + mp_log(z);
    z.re += 1;
  }
  const Mp half = Mp(1) / 2;
  const Mp two_pi = 2 * boost::math::constants::pi<Mp>();
  MpComplex result = (z - MpComplex{half, 0}) * mp_log(z) - z + MpComplex{half * log(two_pi), 0};
  MpComplex inv = inverse(z);
  MpComplex inv2 = inv * inv;
  MpComplex p = inv;
  for (int k = 1; k <= 30; ++k) {
    Mp b = boost::math::bernoulli_b2n<Mp>(k) / (Mp(2 * k) * Mp(2 * k - 1));
    result = result + MpComplex{b, 0} * p;
    p = p * inv2;
  }
  result = result - shift;
  return {static_cast<double>(result.re), static_cast<double>(result.im)};
}

// Direct summation of -2 * sum_k (z+k)^{-3} in long double, with a three-term
// Euler-Maclaurin estimate of the tail beyond N terms.
std::complex<long double> oracle_trigamma2(std::complex<long double> z, long N) {
  std::complex<long double> sum = 0;
  for (long k = N - 1; k >= 0; --k) {
    std::complex<long double> w = 1.0L / (z + static_cast<long double>(k));
    sum += w * w * w;
  }
  std::complex<long double> e = 1.0L / (z + static_cast<long double>(N));
  sum += 0.5L * e * e + 0.5L * e * e * e + 0.25L * e * e * e * e;
  return -2.0L * sum;
}

double rel_err(Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("log_gamma reference values") {
  CHECK(std::abs(log_gamma(1.0)) < 1e-14);
  CHECK(std::abs(log_gamma(2.0)) < 1e-14);
  CHECK(std::abs(log_gamma(0.5) - 0.5 * std::log(std::numbers::pi)) < 1e-14);
  CHECK(std::abs(log_gamma(11.0) - std::log(3628800.0)) < 1e-13);
}

TEST_CASE("log_gamma matches the 50-digit oracle") {
  const Complex pts[] = {{3.7, 2.1},    {0.1, 0.2},   {-2.5, 0.75},  {-49.5, 0.3}, {25.0, -300.0},
                         {1e4, 1.0},    {0.5, -9e3},  {-10.2, -4.0}, {7.0, 0.0},   {-0.5, 0.0},
                         {1.5, 1e-8},   {-3.3, 0.0}};
  for (Complex z : pts) {
    const Complex got = log_gamma(z);
    const Complex want = oracle_log_gamma(z);
    INFO("z = " << z.real() << " + " << z.imag() << "i");
    CHECK(std::abs(got - want) <= 1e-13 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("log_gamma branch follows the analytic continuation") {
  // Across the negative real axis the imaginary part jumps by a multiple of 2 pi.
  const Complex above = log_gamma({-2.5, 1e-12});
  const Complex below = log_gamma({-2.5, -1e-12});
  CHECK(std::abs(above.real() - below.real()) < 1e-9);
  const double jump = (above.imag() - below.imag()) / (2.0 * std::numbers::pi);
  CHECK(std::abs(jump - std::round(jump)) < 1e-9);
  CHECK(std::abs(std::round(jump)) >= 1.0);
}

TEST_CASE("polygamma reference values") {
  CHECK(std::abs(polygamma(1, 1.0) - std::numbers::pi * std::numbers::pi / 6.0) < 1e-14);
  CHECK(std::abs(polygamma(0, 1.0) + 0.5772156649015329) < 1e-14);
  CHECK(std::abs(polygamma(2, 0.5) + 14.0 * 1.2020569031595942) < 1e-12);
  CHECK(std::abs(polygamma(3, 0.5) - std::pow(std::numbers::pi, 4)) < 1e-11);
}

TEST_CASE("polygamma m=2 matches brute-force series at 0.5+10i") {
  const std::complex<long double> want = oracle_trigamma2({0.5L, 10.0L}, 1000000);
  const Complex w{static_cast<double>(want.real()), static_cast<double>(want.imag())};
  const Complex got = polygamma(2, {0.5, 10.0});
  CHECK(std::abs(got - w) <= 1e-12 * std::abs(w));
}

TEST_CASE("polygamma agrees with Boost on the positive real axis") {
  for (int m = 0; m <= 8; ++m) {
    for (double x : {0.013, 0.3, 1.0, 2.75, 9.5, 14.0, 77.7, 1234.5}) {
      const double want = boost::math::polygamma(m, x);
      const double got = polygamma(m, x).real();
      INFO("m=" << m << " x=" << x);
      CHECK(std::abs(got - want) <= 1e-12 * std::abs(want));
    }
  }
}

TEST_CASE("polygamma recurrence on a 1000-point grid") {
  int checked = 0;
  for (int i = 1; i <= 40; ++i) {
    for (int j = 0; j < 25; ++j) {
      const Complex z{0.1 * i, -4.0 + 8.0 * j / 24.0};
      for (int m = 0; m <= 4; ++m) {
        const double mf = std::tgamma(m + 1.0);
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        const Complex lhs = polygamma(m, z);
        const Complex residual = lhs - polygamma(m, z + 1.0) + sign * mf / std::pow(z, m + 1);
        REQUIRE(std::abs(residual) <= 1e-11 * (1.0 + std::abs(lhs)));
      }
      ++checked;
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("polygamma conjugate symmetry") {
  for (int i = 0; i < 200; ++i) {
    const Complex z{-5.3 + 0.173 * i, 0.1 + 0.05 * (i % 37)};
    for (int m = 0; m <= 8; ++m) {
      const Complex a = polygamma(m, std::conj(z));
      const Complex b = std::conj(polygamma(m, z));
      REQUIRE(std::abs(a - b) <= 1e-13 * std::abs(b));
    }
  }
}

TEST_CASE("polygamma derivative consistency") {
  const double h = 1e-5;
  for (int i = 0; i < 60; ++i) {
    const Complex z{0.2 + 0.13 * i, -3.0 + 0.1 * i};
    for (int m = 0; m < 8; ++m) {
      const Complex d = (polygamma(m, z + h) - polygamma(m, z - h)) / (2.0 * h);
      const Complex want = polygamma(m + 1, z);
      REQUIRE(std::abs(d - want) <= 1e-7 * std::abs(want));
    }
  }
}

TEST_CASE("log_gamma derivative is digamma") {
  const double h = 1e-5;
  for (int i = 0; i < 40; ++i) {
    const Complex z{-7.7 + 0.4 * i, 0.3 + 0.2 * i};
    const Complex d = (log_gamma(z + h) - log_gamma(z - h)) / (2.0 * h);
    CHECK(rel_err(d, polygamma(0, z)) <= 1e-8);
  }
}

TEST_CASE("polygamma log-concavity inequality") {
  for (int m = 2; m <= 4; ++m) {
    for (int i = 0; i <= 400; ++i) {
      const double z = 0.05 + (20.0 - 0.05) * i / 400.0;
      const double a = polygamma(m, z).real();
      const double lo = polygamma(m - 1, z).real();
      const double hi = polygamma(m + 1, z).real();
      REQUIRE(a * a < lo * hi);
    }
  }
  // At m = 1 the lower neighbour is the digamma function, which changes sign;
  // the inequality fails once psi_0 > 0.
  const double z = 2.0;
  const double a = polygamma(1, z).real();
  CHECK_FALSE(a * a < polygamma(0, z).real() * polygamma(2, z).real());
}

TEST_CASE("sine bounds") {
  for (int i = 0; i <= 50; ++i) {
    const double theta = 0.02 * i;
    for (int j = 0; j <= 60; ++j) {
      const double y = (j % 2 ? -1.0 : 1.0) * (1.0 + 0.25 * j);
      const double mag = std::numbers::pi / std::abs(std::sin(std::numbers::pi * Complex(theta, y)));
      const double e = std::exp(std::numbers::pi * std::abs(y));
      CHECK(2.0 * std::numbers::pi / (e + 1.0) <= mag * (1 + 1e-14));
      CHECK(mag <= 2.0 * std::numbers::pi / (e - 1.0) * (1 + 1e-14));
    }
  }
}

TEST_CASE("special functions reject poles and bad orders") {
  for (double p : {0.0, -1.0, -7.0}) {
    CHECK_THROWS_AS(log_gamma(p), sticky::Error);
    CHECK_THROWS_AS(polygamma(1, p), sticky::Error);
  }
  try {
    polygamma(0, -3.0);
  } catch (const sticky::Error& e) {
    CHECK(e.code() == sticky::ErrorCode::pole);
  }
  CHECK_THROWS_AS(polygamma(9, 1.0), sticky::Error);
  CHECK_THROWS_AS(polygamma(-1, 1.0), sticky::Error);
  CHECK_THROWS_AS(log_gamma(Complex(NAN, 0.0)), sticky::Error);
}
