#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace sticky {

// Pairwise (cascade) summation.
double pairwise_sum(const double* x, std::size_t n);
double pairwise_sum(const std::vector<double>& x);

double mean(const std::vector<double>& x);
double sample_variance(const std::vector<double>& x);
double standard_error(const std::vector<double>& x);
double median(std::vector<double> x);
// Type-7 quantile.
double quantile(std::vector<double> x, double p);
// log(mean(exp(v))) without overflow.
double log_mean_exp(const std::vector<double>& v);

// Kolmogorov survival function Q(z) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 z^2).
double kolmogorov_q(double z);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Cubic Hermite table of the GUE Tracy-Widom CDF on [-8, 6], built once.
double tracy_widom_cdf_fast(double y);
double tracy_widom_quantile_fast(double p);

}  // namespace sticky
