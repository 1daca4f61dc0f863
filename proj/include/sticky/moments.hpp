#pragma once

#include <functional>
#include <vector>

#include "sticky/specfun.hpp"

namespace sticky {

constexpr int kMaxMomentOrder = 8;

struct MomentRequest {
  int k = 1;
  double lambda = 1.0;
  double t = 1.0;
  std::vector<double> xs;      // nonincreasing
  std::vector<double> alphas;  // empty selects default_alphas(k)
  double cutoff_scale = 1.0;   // multiplies the 1e-14 Gaussian cutoff y*; < 1 trips the tail check
};

struct MomentResult {
  double value = 0.0;
  double imag = 0.0;
  double tail_bound = 0.0;
  std::vector<double> cutoffs;  // y* per axis (first Richardson leg when t = 0)
  int nodes = 0;                // per axis
  bool t_zero_extrapolated = false;
};

// Equal-gap ladder: every pole of the integrand sits the same distance g from
// the neighbouring contour, with g as large as alpha_k <= top allows. The
// moment routines use top = min(1, 1 / sqrt(t lambda^2)).
std::vector<double> default_alphas(int k, double top = 1.0);
// alpha_k = 1, alpha_j = 0.9 alpha_{j+1} / (1 + alpha_{j+1}).
std::vector<double> margin_alphas(int k);
void check_nesting(const std::vector<double>& alphas);
int default_moment_nodes(int k);

MomentResult mixed_moment(const MomentRequest& req, int nodes = 0);

// The contour integral itself, without the ordering precondition on xs (the
// integral is an entire function of xs).
Complex moment_integral(const MomentRequest& req, int nodes = 0, double* tail_bound = nullptr,
                        double* cutoff = nullptr);

struct SeriesResult {
  double value = 1.0;
  std::vector<double> terms;     // u^k Phi^(k) / k!
  double remainder_bound = 0.0;  // Phi^(1) * sum_{k > k_max} |u|^k / k!
  double crude_bound = 0.0;      // e^{|u|} |u|^{k_max+1} / (k_max+1)!
};

// E[exp(u K_{0,t}(0, [x, inf)))] = sum_k u^k / k! Phi^(k)_t(-x, ..., -x).
SeriesResult laplace_via_moments(double lambda, double t, double x, double u, int k_max, double tail_tol = 1e-8,
                                 int nodes = 0);

enum class BetheSign { minus, plus };

// sum over permutations of prod_{i<j} (z_s(i) - z_s(j) - 1) / (z_s(i) - z_s(j))
// times prod_j exp(sign * lambda x_j / z_s(j)).
Complex bethe_eigenfunction(const std::vector<Complex>& zs, const std::vector<double>& xs, double lambda,
                            BetheSign sign = BetheSign::minus);

// |(d1 d2 + lambda (d1 - d2)) f| at (x, x), fourth-order 5x5 stencil.
double boundary_condition_residual(const std::function<Complex(double, double)>& f, double lambda, double x,
                                   double h);

struct KpzPair {
  double flow = 0.0;  // rescaled flow moment at lambda_probe
  double she = 0.0;   // stochastic heat equation moment
};

// xs nondecreasing; k <= 3.
KpzPair kpz_limit_moment(int k, double t, const std::vector<double>& xs, double kappa, double lambda_probe,
                         int nodes = 0);
double she_moment(int k, double t, const std::vector<double>& xs, double kappa, int nodes = 0);

}  // namespace sticky
