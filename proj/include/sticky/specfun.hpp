#pragma once

#include <complex>

namespace sticky {

using Complex = std::complex<double>;

// Complex log-gamma, analytic continuation of the real log-gamma with branch
// cut along the non-positive real axis (the convention of scipy's loggamma).
Complex log_gamma(Complex z);

// Polygamma psi_m(z) = d^{m+1}/dz^{m+1} log Gamma(z) for 0 <= m <= 8.
Complex polygamma(int m, Complex z);

inline Complex digamma(Complex z) { return polygamma(0, z); }

constexpr int kMaxPolygammaOrder = 8;


}  // namespace sticky
