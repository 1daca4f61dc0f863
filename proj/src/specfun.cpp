#include "sticky/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "sticky/errors.hpp"

namespace sticky {
namespace {

// B_{2k} for k = 1..13.
constexpr std::array<double, 13> kBernoulli = {
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
};
constexpr int kTerms = 12;  // the 13th entry feeds the remainder bound
constexpr double kRelTol = 1e-16;
constexpr double kMinModulus = 12.0;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

Complex ipow(Complex z, int n) {
  Complex r = 1.0;
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

bool is_pole(Complex z) { return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real()); }

void check_argument(Complex z, const char* fn) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    fail(ErrorCode::domain, std::string(fn) + ": non-finite argument");
  if (is_pole(z)) fail(ErrorCode::pole, std::string(fn) + ": pole at non-positive integer");
  if (z.real() < -1e6 || std::abs(z) > 1e300)
    fail(ErrorCode::domain, std::string(fn) + ": argument outside supported range");
}

// Magnitude of the Stirling-type term k (1-based) of the asymptotic series for
// psi_m (m >= 0) or log Gamma (m = -1), before the Re z >= 0 sector factor.
double term_magnitude(int m, int k, double r) {
  const double b = std::abs(kBernoulli[k - 1]);
  if (m < 0) return b / (2.0 * k * (2.0 * k - 1.0) * std::pow(r, 2 * k - 1));
  if (m == 0) return b / (2.0 * k * std::pow(r, 2 * k));
  return b * factorial(2 * k + m - 1) / (factorial(2 * k) * std::pow(r, 2 * k + m));
}

double remainder_bound(int m, Complex z) {
  const double r = std::abs(z);
  const double half_arg = 0.5 * std::abs(std::arg(z));
  const int k = kTerms + 1;
  const int power = 2 * k + std::max(m, 0);
  return term_magnitude(m, k, r) * std::pow(1.0 / std::cos(half_arg), power);
}

double leading_magnitude(int m, Complex z) {
  const double r = std::abs(z);
  if (m < 0) return std::max(1.0, r * std::abs(std::log(z)));
  if (m == 0) return std::max(1.0, std::abs(std::log(z)));
  return factorial(m - 1) / std::pow(r, m);
}

bool asymptotic_ready(int m, Complex z) {
  if (z.real() < 0.0 || std::abs(z) < kMinModulus) return false;
  return remainder_bound(m, z) <= kRelTol * leading_magnitude(m, z);
}

Complex stirling_log_gamma(Complex z) {
  const Complex inv = 1.0 / z;
  const Complex inv2 = inv * inv;
  Complex sum = 0.0;
  Complex p = inv;
  for (int k = 1; k <= kTerms; ++k) {
    sum += kBernoulli[k - 1] / (2.0 * k * (2.0 * k - 1.0)) * p;
    p *= inv2;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * std::numbers::pi) + sum;
}

Complex asymptotic_polygamma(int m, Complex z) {
  const Complex inv = 1.0 / z;
  const Complex inv2 = inv * inv;
  if (m == 0) {
    Complex sum = 0.0;
    Complex p = inv2;
    for (int k = 1; k <= kTerms; ++k) {
      sum += kBernoulli[k - 1] / (2.0 * k) * p;
      p *= inv2;
    }
    return std::log(z) - 0.5 * inv - sum;
  }
  Complex zm = ipow(inv, m);
  Complex sum = factorial(m - 1) * zm + 0.5 * factorial(m) * zm * inv;
  Complex p = zm * inv2;
  for (int k = 1; k <= kTerms; ++k) {
    sum += kBernoulli[k - 1] * factorial(2 * k + m - 1) / factorial(2 * k) * p;
    p *= inv2;
  }
  return (m % 2 == 1) ? sum : -sum;
}

void check_result(Complex w, const char* fn) {
  if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
    fail(ErrorCode::numeric, std::string(fn) + ": result not representable");
}

}  // namespace

Complex log_gamma(Complex z) {
  check_argument(z, "log_gamma");
  Complex shift = 0.0;
  while (!asymptotic_ready(-1, z)) {
    shift += std::log(z);
    z += 1.0;
  }
  const Complex w = stirling_log_gamma(z) - shift;
  check_result(w, "log_gamma");
  return w;
}

Complex polygamma(int m, Complex z) {
  if (m < 0 || m > kMaxPolygammaOrder)
    fail(ErrorCode::invalid_argument, "polygamma: order must lie in [0, 8]");
  check_argument(z, "polygamma");
  const double mf = factorial(m);
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  Complex shift = 0.0;
  while (!asymptotic_ready(m, z)) {
    // psi_m(z) = psi_m(z+1) - (-1)^m m! / z^{m+1}
    shift += sign * mf / ipow(z, m + 1);
    z += 1.0;
  }
  const Complex w = asymptotic_polygamma(m, z) - shift;
  check_result(w, "polygamma");
  return w;
}

}  // namespace sticky
