#pragma once

#include <vector>

#include "sticky/contour.hpp"

namespace sticky {

enum class KernelFamily { sticky_flow, beta_rwre, airy };

struct StickyFlowParams {
  double lambda = 1.0;
  double t = 1.0;
  double x = 1.0;
  Complex u = -1.0;
  double radius = 0.25;  // circle of this radius centred at radius
};

struct BetaRwreParams {
  double alpha = 1.0;
  double beta = 1.0;
  int t = 1;
  int x = -1;
  Complex u = -1.0;
  double radius = 0.0;  // 0 selects min(1/4, (alpha+beta)/2)
};

struct AiryParams {
  double shift = 0.0;  // determinant on L^2(shift, infinity)
};

struct KernelSpec {
  KernelFamily family = KernelFamily::sticky_flow;
  StickyFlowParams sticky;
  BetaRwreParams rwre;
  AiryParams airy;
  int inner_nodes_per_panel = 16;

  static KernelSpec sticky_flow(double lambda, double t, double x, Complex u, double radius = 0.25);
  static KernelSpec beta_rwre(double alpha, double beta, int t, int x, Complex u);
  static KernelSpec airy_kernel(double shift);
};

void validate(const KernelSpec& spec);

// Outer (Nystrom) contour for the given node density.
Contour outer_contour(const KernelSpec& spec, int nodes_per_segment);

Complex kernel_eval(const KernelSpec& spec, Complex v, Complex v_prime);

struct DetOptions {
  int nodes_per_segment = 16;
  double tolerance = 1e-10;
  int max_doublings = 3;
  int threads = 1;
};

struct DetReport {
  double value = 1.0;
  double imag = 0.0;
  int nodes = 0;
  int nodes_per_segment = 0;
  std::vector<double> history;  // value at each density tried
  double last_change = 0.0;
  double inner_cutoff = 0.0;
  double inner_tail_bound = 0.0;
  double pivot_ratio = 1.0;  // max |U_ii| / min |U_ii| of the LU factorization
};

// Single Nystrom evaluation at a fixed density.
DetReport nystrom_det(const KernelSpec& spec, int nodes_per_segment, int threads = 1);

// Nystrom with node doubling until successive values agree within tolerance.
DetReport fredholm_det(const KernelSpec& spec, const DetOptions& opts = {});

DetReport laplace_transform(double lambda, double t, double x, double u, const DetOptions& opts = {},
                            double radius = 0.25);

// E[exp(u P(X(t) > x))] for the beta RWRE started at 0. The determinant with
// exponents (t-x)/2, (t+x)/2 computes the event X(t) >= x, so the strict event
// is evaluated at x + 2.
DetReport beta_rwre_laplace(double alpha, double beta, int t, int x, double u, const DetOptions& opts = {});

double airy_kernel(double x, double y);
double tracy_widom_cdf(double y);
// 1 - F_GUE(y) without cancellation: -expm1(-sum_n tr(K^n)/n) for the Airy
// kernel on [y, y + 16] with Gauss-Legendre nodes. Falls back to 1 - F for y < 0.
double tracy_widom_sf(double y);
// Smallest y with F_GUE(y) >= p, by bisection on [-10, 10].
double tracy_widom_quantile(double p);

// det(I - K) of a dense complex matrix given row-major I - K entries.
Complex lu_determinant(std::vector<Complex>& a, int n, double* pivot_ratio = nullptr);

}  // namespace sticky
