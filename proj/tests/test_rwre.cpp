#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "sticky/errors.hpp"
#include "sticky/experiments.hpp"
#include "sticky/fredholm.hpp"
#include "sticky/rwre.hpp"
#include "sticky/stats.hpp"

using namespace sticky;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ok;
}

std::vector<double> draws(double a, double b, int n, uint64_t seed) {
  Environment env(a, b, seed, 0);
  std::vector<double> w(n), wb(n);
  env.fill(0, 1, 0, n, w.data(), wb.data());
  return w;
}

EnvironmentGrid grid(double a, double b, int64_t t, uint64_t seed, uint64_t stream = 0) {
  return EnvironmentGrid(a, b, t, -t - 4, t + 4, seed, stream);
}

}  // namespace

TEST_CASE("beta(1,1) weights are uniform") {
  const auto w = draws(1.0, 1.0, 20000, 3);
  CHECK(ks_one_sample(w, [](double x) { return x; }).p_value > 0.01);
}

TEST_CASE("beta(2,3) mean") {
  const auto w = draws(2.0, 3.0, 100000, 4);
  CHECK(std::abs(mean(w) - 0.4) < 3.0 * standard_error(w));
}

TEST_CASE("sticky regime concentrates near 0 and 1") {
  const auto w = draws(0.02, 0.02, 100000, 5);
  const auto out = std::count_if(w.begin(), w.end(), [](double x) { return x < 0.05 || x > 0.95; });
  CHECK(static_cast<double>(out) / w.size() > 0.8);
  CHECK(std::all_of(w.begin(), w.end(), [](double x) { return x > 0.0 && x < 1.0; }));
}

TEST_CASE("environment regeneration is bit-identical") {
  for (auto [a, b] : {std::pair{0.02, 0.02}, std::pair{0.3, 2.0}, std::pair{2.5, 4.0}}) {
    Environment e1(a, b, 11, 7), e2(a, b, 11, 7), e3(a, b, 11, 8);
    std::vector<double> w1(500), w2(500), w3(500), wb(500);
    e1.fill(-250, 1, 9, 500, w1.data(), wb.data());
    e2.fill(-250, 1, 9, 500, w2.data(), wb.data());
    e3.fill(-250, 1, 9, 500, w3.data(), wb.data());
    CHECK(w1 == w2);
    CHECK(w1 != w3);
    // Single-cell lookups agree with row fills.
    for (int i = 0; i < 500; i += 37) CHECK(e1.weight(-250 + i, 9) == w1[i]);
  }
}

TEST_CASE("kernel at t = 0 and t = 1") {
  auto g = grid(0.5, 0.5, 3, 1);
  const auto k0 = quenched_kernel(g, 0, 0);
  CHECK(k0.masses.size() == 1);
  CHECK(k0.mass(0) == 1.0);
  g.set_weight(0, 0, 0.3);
  const auto k1 = quenched_kernel(g, 1, 0);
  CHECK(k1.mass(1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(k1.mass(-1) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("tail reductions") {
  auto g = grid(0.5, 0.5, 8, 2);
  for (int t : {1, 4, 8}) {
    CHECK(quenched_tail(g, t, 0, -t - 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(quenched_tail(g, t, 0, t) == 0.0);
  }
  CHECK(quenched_tail(g, 1, 0, -1) == doctest::Approx(g.weight(0, 0)).epsilon(1e-15));
  CHECK(quenched_tail(g, 1, 0, 1, TailKind::inclusive) == doctest::Approx(g.weight(0, 0)).epsilon(1e-15));
}

TEST_CASE("annealed two-step tail is one quarter") {
  const int n = 100000;
  std::vector<double> p(n);
  for (int i = 0; i < n; ++i) {
    auto g = grid(0.7, 0.7, 2, 9, i);
    p[i] = quenched_tail(g, 2, 0, 2, TailKind::inclusive);
  }
  CHECK(std::abs(mean(p) - 0.25) < 3.0 * standard_error(p));
}

TEST_CASE("window violations") {
  EnvironmentGrid g(0.5, 0.5, 10, -5, 5, 1, 0);
  CHECK(code_of([&] { quenched_kernel(g, 6, 0); }) == ErrorCode::window);
  CHECK(code_of([&] { quenched_kernel(g, 11, 0); }) == ErrorCode::window);
  CHECK(code_of([&] { quenched_kernel(g, 5, 0); }) == ErrorCode::ok);
}

TEST_CASE("mass conservation, parity and monotone tails") {
  for (auto [a, b] : {std::pair{0.02, 0.02}, std::pair{0.5, 1.5}, std::pair{3.0, 3.0}}) {
    for (uint64_t s = 0; s < 5; ++s) {
      const int64_t t = 60 + 7 * static_cast<int64_t>(s);
      auto g = grid(a, b, t, 21, s);
      const auto k = quenched_kernel(g, t, 0);
      CHECK(std::abs(k.total() - 1.0) < 1e-12);
      CHECK(((k.x_min - t) % 2 + 2) % 2 == 0);
      for (int64_t x = -t - 1; x <= t + 1; ++x)
        if (((x - t) % 2 + 2) % 2 != 0) CHECK(k.mass(x) == 0.0);
      double prev = 1.0;
      for (int64_t r = -t - 2; r <= t + 1; ++r) {
        const double q = quenched_tail(g, t, 0, r);
        CHECK(q <= prev + 1e-15);
        prev = q;
      }
    }
  }
}

TEST_CASE("band recursions agree with the full cone") {
  Environment env(0.1, 0.1, 31, 0);
  const int64_t T = 1600;
  auto full = band_forward(env, 0, T, cone_band(0));
  CHECK(std::abs(full.kernel.total() - 1.0) < 1e-12);
  for (double y : {120.0, 200.0, 260.0}) {
    double cone = 0.0;
    for (size_t i = 0; i < full.kernel.masses.size(); ++i)
      if (full.kernel.x_min + 2 * static_cast<double>(i) >= y) cone += full.kernel.masses[i];
    cone = std::log(cone) + full.kernel.log_scale;
    const double band = bridge_log_tail(env, 0, T, y, 6.0, 200.0, false);
    CHECK(std::abs(band - cone) < 1e-9 * std::abs(cone) + 1e-12);
  }
  for (double y : {-30.0, 0.0, 41.0, 80.0}) {
    const double ref = smoothed_tail(full.kernel, y);
    CHECK(std::abs(target_tail(env, 0, T, y, 6.0) - ref) < 1e-7);
  }
}

TEST_CASE("deep tails stay finite through rescaling") {
  Environment env(0.05, 0.05, 4, 1);
  const int64_t T = 20000;
  const double a = bridge_log_tail(env, 0, T, 0.3 * T, 6.0, 300.0, false);
  const double b = bridge_log_tail(env, 0, T, 0.3 * T, 9.0, 600.0, false);
  CHECK(std::isfinite(a));
  CHECK(a < -700.0);
  CHECK(std::abs(a - b) < 1e-8 * std::abs(a));
}

TEST_CASE("polymer partition function") {
  const auto env = polymer_environment(2.5, 1.0, 8, 0);
  for (int n : {-2, 0, 1, 5}) CHECK(polymer_partition(env, 0, n) == (n > 0 ? 1.0 : 0.0));
  CHECK(polymer_partition(env, 1, 1) == env.weight(1, 1));
  CHECK(code_of([] { polymer_environment(1.0, 1.0, 1, 0); }) == ErrorCode::invalid_argument);
}

TEST_CASE("polymer matches the random-walk tail in law") {
  const double nu = 2.5, mu = 1.0;
  const int t = 7, n = 3, samples = 10000;
  std::vector<double> z, q;
  for (int i = 0; i < samples; ++i) {
    z.push_back(polymer_partition(polymer_environment(nu, mu, 99, i), t, n));
    auto g = grid(mu, nu - mu, t, 77, i);
    q.push_back(quenched_tail(g, t, 0, t - 2 * n + 2, TailKind::inclusive));
  }
  CHECK(ks_two_sample(z, q).p_value > 0.01);
}

TEST_CASE("single sticky path is a simple random walk") {
  std::vector<double> d;
  for (int s = 0; s < 10000; ++s) {
    const auto b = sample_sticky_paths(1.0, 0.1, 1.0, 1, {0.0}, 1000 + s);
    d.push_back(b.position(0, b.steps));
  }
  CHECK(std::abs(mean(d)) < 3.0 * standard_error(d));
  CHECK(sample_variance(d) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("two sticky paths coincide for a positive fraction of time") {
  auto coincide = [](const PathBundle& a, size_t i, const PathBundle& b, size_t j) {
    int64_t same = 0;
    for (int64_t s = 1; s <= a.steps; ++s) same += a.paths[i][s] == b.paths[j][s];
    return static_cast<double>(same) / a.steps;
  };
  std::vector<double> sticky, control;
  for (int s = 0; s < 200; ++s) {
    const auto b = sample_sticky_paths(1.0, 0.02, 1.0, 2, {0.0, 0.0}, 500 + s);
    sticky.push_back(coincide(b, 0, b, 1));
    const auto c1 = sample_sticky_paths(1.0, 0.02, 1.0, 1, {0.0}, 100000 + 2 * s);
    const auto c2 = sample_sticky_paths(1.0, 0.02, 1.0, 1, {0.0}, 100001 + 2 * s);
    control.push_back(coincide(c1, 0, c2, 0));
  }
  CHECK(mean(sticky) > 0.0);
  CHECK(mean(sticky) - mean(control) > 3.0 * std::hypot(standard_error(sticky), standard_error(control)));
}

TEST_CASE("path replay and exchangeability") {
  const std::vector<double> x0{0.0, 0.1, 0.0, -0.2};
  const auto a = sample_sticky_paths(1.0, 0.05, 0.5, 4, x0, 42);
  const auto b = sample_sticky_paths(1.0, 0.05, 0.5, 4, x0, 42);
  CHECK(a.paths == b.paths);
  // Reversed order permutes the output; equal starts keep their occurrence order.
  const std::vector<double> rev{-0.2, 0.0, 0.1, 0.0};
  const auto c = sample_sticky_paths(1.0, 0.05, 0.5, 4, rev, 42);
  CHECK(c.paths[0] == a.paths[3]);
  CHECK(c.paths[2] == a.paths[1]);
  CHECK(c.paths[1] == a.paths[0]);
  CHECK(c.paths[3] == a.paths[2]);
  CHECK(code_of([] { sample_sticky_paths(1.0, 0.3, 1.0, 1, {0.0}, 1); }) == ErrorCode::invalid_argument);
}

TEST_CASE("SBM1 round trip") {
  const auto path = std::filesystem::temp_directory_path() / "sticky_rwre_roundtrip.sbm1";
  auto g = grid(0.3, 0.4, 12, 5, 2);
  g.write_sbm1(path.string());
  const auto h = EnvironmentGrid::read_sbm1(path.string());
  CHECK(h.from_snapshot());
  CHECK(h.materialize() == g.materialize());
  CHECK(h.environment().seed() == 5);
  CHECK(h.environment().stream() == 2);
  const auto k1 = quenched_kernel(g, 12, 0), k2 = quenched_kernel(h, 12, 0);
  for (int64_t x = -12; x <= 12; x += 2) CHECK(std::abs(k1.mass(x) - k2.mass(x)) < 1e-15);
  {
    std::ofstream f(path, std::ios::binary);
    f << "XXXX garbage";
  }
  CHECK(code_of([&] { EnvironmentGrid::read_sbm1(path.string()); }) == ErrorCode::schema);
  std::filesystem::remove(path);
  CHECK(code_of([&] { EnvironmentGrid::read_sbm1(path.string()); }) == ErrorCode::io);
}

TEST_CASE("fluctuation normalization inverts exactly") {
  const auto s = make_saddle(0.5, 1.3);
  for (double v : {-400.0, -123.25, -1.0}) {
    const double z = normalize_log_kernel(s, 50.0, v);
    CHECK(std::abs(unnormalize(s, 50.0, z) - v) < 1e-12 * std::abs(v));
  }
}

TEST_CASE("maximum by the quantile transform") {
  QuenchedKernel k;
  k.t = 4;
  k.x_min = -4;
  k.masses = {0.1, 0.2, 0.3, 0.25, 0.15};
  const double log_n = std::log(3.0);
  for (double u : {0.002, 0.05, 0.3, 0.5, 0.9, 0.999}) {
    int64_t expect = k.x_max();
    for (int64_t r = k.x_min; r <= k.x_max(); r += 2) {
      double tail = 0.0;
      for (int64_t x = r + 2; x <= k.x_max(); x += 2) tail += k.mass(x);
      if (std::pow(1.0 - tail, 3.0) >= u) {
        expect = r;
        break;
      }
    }
    CHECK(max_quantile(k, log_n, u) == expect);
  }
  // With one walker the quantile transform reproduces the kernel.
  CounterStream g(derive_key(1, 0), 0, 0, Domain::extremal);
  std::vector<int> hits(5, 0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++hits[(max_quantile(k, 0.0, g.uniform()) + 4) / 2];
  for (int j = 0; j < 5; ++j) {
    const double p = k.masses[j];
    CHECK(std::abs(hits[j] / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST_CASE("extremal location and slope") {
  const double x0 = extremal_location(1.0, 1.02);
  CHECK(rate_function(x0) == doctest::Approx(1.02).epsilon(1e-12));
  const double x2 = extremal_location(2.0, 4.0 * 1.02);
  CHECK(x2 == doctest::Approx(2.0 * x0).epsilon(1e-10));
  for (double x : {1.4, 2.0, 3.5}) {
    const double h = 1e-5;
    const double fd = (rate_function(x + h) - rate_function(x - h)) / (2 * h);
    CHECK(std::abs(fd - rate_function_derivative(x)) < 1e-6);
  }
  // Doubling lambda with x -> 2x multiplies the LDP exponent by four.
  for (double th : {0.4, 0.9}) {
    const auto s1 = make_saddle(th, 1.0), s2 = make_saddle(th, 2.0);
    CHECK(s2.x_of_theta == doctest::Approx(2.0 * s1.x_of_theta).epsilon(1e-12));
    CHECK(4.0 * s2.J == doctest::Approx(4.0 * s1.J).epsilon(1e-12));
    CHECK(-4.0 * rate_function(s2.x_of_theta / 2.0) == doctest::Approx(4.0 * -rate_function(s1.x_of_theta)));
  }
  CHECK(code_of([] { extremal_particle_experiment({1.0, 1.0, 10.0, 0.1, 1, 1, 1, 6.0}); }) == ErrorCode::domain);
}

TEST_CASE("statistics helpers") {
  CHECK(kolmogorov_q(1.0) == doctest::Approx(0.26999967).epsilon(1e-7));
  CHECK(kolmogorov_q(0.5) == doctest::Approx(0.96394524).epsilon(1e-7));
  CHECK(kolmogorov_q(0.9) == doctest::Approx(0.39273070).epsilon(1e-6));
  CHECK(kolmogorov_q(0.1) == 1.0);
  std::vector<double> x(1000);
  for (size_t i = 0; i < x.size(); ++i) x[i] = 0.1 * static_cast<double>(i % 7) + 1e-3 * i;
  double naive = 0.0;
  for (double v : x) naive += v;
  CHECK(pairwise_sum(x) == doctest::Approx(naive).epsilon(1e-14));
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == 2.5);
  CHECK(log_mean_exp({-1000.0, -1000.0}) == doctest::Approx(-1000.0));
  for (double y : {-5.0, -3.3, -1.8, -0.45, 1.2, 3.0})
    CHECK(std::abs(tracy_widom_cdf_fast(y) - tracy_widom_cdf(y)) < 2e-6);
  const auto two = ks_two_sample({1, 2, 3, 4}, {1, 2, 3, 4});
  CHECK(two.statistic == 0.0);
}

TEST_CASE("Monte Carlo summaries are independent of the worker count") {
  LaplaceMcConfig c;
  c.epsilon = 0.1;
  c.n_env = 64;
  c.seed = 17;
  c.workers = 1;
  const auto a = laplace_monte_carlo(c);
  c.workers = 3;
  const auto b = laplace_monte_carlo(c);
  CHECK(a.mean == b.mean);
  CHECK(a.se == b.se);
  CHECK(a.cells == b.cells);
}

TEST_CASE("discrete moment matches the annealed Gaussian") {
  MomentMcConfig c;
  c.xs = {0.5};
  c.epsilon = 0.1;
  c.n_env = 400;
  const auto e = moment_monte_carlo(c);
  // One walker: every environment gives the same mean, the SRW tail.
  CHECK(std::abs(e.mean - 0.6915) < 0.02 + 3 * e.se);
}

TEST_CASE("experiment preconditions") {
  LdpConfig l;
  l.x_over_t = 1.0;
  CHECK(code_of([&] { ldp_experiment(l); }) == ErrorCode::domain);
  FluctuationConfig f;
  f.theta = 1.5;
  CHECK(code_of([&] { fluctuation_experiment(f); }) == ErrorCode::domain);
}
