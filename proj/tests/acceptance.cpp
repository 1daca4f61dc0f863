// One line per acceptance criterion; exit status 0 only when all pass.
// Usage: acceptance [artifact-dir [criterion ...]]
#include <sys/wait.h>

#include <boost/math/distributions/normal.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sticky/fredholm.hpp"
#include "sticky/moments.hpp"
#include "sticky/saddle.hpp"
#include "sticky/specfun.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace sticky;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path g_dir;
int g_failed = 0;
std::set<int> g_only;
std::vector<fs::path> g_stochastic_runs;

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

void report(int id, double budget_s, const std::function<Outcome()>& body) {
  if (!g_only.empty() && !g_only.count(id)) return;
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string timing = fmt(secs, 3) + " s";
  if (budget_s > 0) {
    timing += " of " + fmt(budget_s, 4) + " s";
    if (secs > budget_s) {
      o.pass = false;
      o.detail += "; over time budget";
    }
  }
  if (!o.pass) ++g_failed;
  std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  [" << timing << "]"
            << std::endl;
}

struct CliRun {
  int code;
  std::string out;
};

CliRun cli(const std::string& args) {
  const fs::path log = g_dir / "last_stdout.txt";
  const std::string cmd = std::string("\"") + STICKY_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int st = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, ss.str()};
}

json load(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

double kummer(double a, double b, double u) {
  double term = 1.0, sum = 1.0;
  for (int k = 0; k < 400 && std::abs(term) > 1e-18; ++k) {
    term *= (a + k) / (b + k) * u / (k + 1);
    sum += term;
  }
  return sum;
}

Outcome anchors() {
  const double x = theta_to_x(1.0, 1.0);
  const double j = rate_function(x);
  const bool ok = std::abs(x - 1.3507) <= 1e-3 && std::abs(j - 1.02) <= 1e-2;
  return {ok, "x(1) = " + fmt(x, 8) + ", J(x(1)) = " + fmt(j, 8)};
}

Outcome saddle_identities() {
  double w1 = 0, w2 = 0, w3 = 0;
  for (double th : {0.3, 0.7, 1.0}) {
    const SaddleData s = make_saddle(th, 1.0);
    w1 = std::max(w1, std::abs(h_eval(th, s, 1)));
    w2 = std::max(w2, std::abs(h_eval(th, s, 2)));
    w3 = std::max(w3, std::abs(h_eval(th, s, 3) - 2.0 * std::pow(s.sigma, 3)));
  }
  const bool ok = w1 <= 1e-9 && w2 <= 1e-8 && w3 <= 1e-8;
  return {ok, "max |h'| " + fmt(w1, 3) + ", |h''| " + fmt(w2, 3) + ", |h''' - 2 sigma^3| " + fmt(w3, 3)};
}

Outcome special_functions() {
  int points = 0, bad = 0;
  double worst_rec = 0, worst_conj = 0, worst_der = 0;
  for (int i = 1; i <= 40; ++i)
    for (int j = 0; j < 25; ++j) {
      const Complex z{0.1 * i, -4.0 + 8.0 * j / 24.0};
      ++points;
      for (int m = 0; m <= 4; ++m) {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        const Complex p = polygamma(m, z);
        const Complex rec = p - polygamma(m, z + 1.0) + sign * std::tgamma(m + 1.0) / std::pow(z, m + 1);
        const double e_rec = std::abs(rec) / (1.0 + std::abs(p));
        const double e_conj = std::abs(polygamma(m, std::conj(z)) - std::conj(p)) / std::abs(p);
        const double h = 1e-5;
        const Complex fd = (polygamma(m, z + h) - polygamma(m, z - h)) / (2.0 * h);
        const Complex next = polygamma(m + 1, z);
        const double e_der = std::abs(fd - next) / std::abs(next);
        worst_rec = std::max(worst_rec, e_rec);
        worst_conj = std::max(worst_conj, e_conj);
        worst_der = std::max(worst_der, e_der);
        bad += (e_rec > 1e-11) + (e_conj > 1e-13) + (e_der > 1e-7);
      }
    }
  int ineq_bad = 0, ineq_points = 0;
  for (int m = 2; m <= 4; ++m)
    for (int i = 0; i <= 400; ++i) {
      const double z = 0.05 + (20.0 - 0.05) * i / 400.0;
      const double a = polygamma(m, z).real();
      ++ineq_points;
      ineq_bad += !(a * a < polygamma(m - 1, z).real() * polygamma(m + 1, z).real());
    }
  const bool ok = points == 1000 && bad == 0 && ineq_bad == 0;
  return {ok, std::to_string(points) + " points: recurrence " + fmt(worst_rec, 2) + ", conjugation " +
                  fmt(worst_conj, 2) + ", derivative " + fmt(worst_der, 2) + "; inequality violated at " +
                  std::to_string(ineq_bad) + " of " + std::to_string(ineq_points)};
}

Outcome kummer_check() {
  double worst = 0;
  std::string detail;
  for (double u : {-0.5, -1.0, -2.0}) {
    const DetReport r = beta_rwre_laplace(0.5, 0.5, 1, -1, u);
    const double gap = std::abs(r.value - kummer(0.5, 1.0, u));
    worst = std::max(worst, gap);
    detail += "u=" + fmt(u, 2) + ": " + fmt(r.value, 10) + " ";
  }
  return {worst <= 1e-6, detail + "max gap " + fmt(worst, 3)};
}

Outcome laplace_crosscheck() {
  const fs::path d = g_dir / "c5_crosscheck";
  fs::remove_all(d);
  const CliRun r = cli("crosscheck laplace --lambda 1 --t 1 --x 1 --u -1 --k-max 8 --epsilon 0.02 --n-env 100000 "
                       "--tolerance 1e-4 --sigmas 3 --seed 20261016 --out " + d.string());
  if (r.code != 0 && r.code != 3) return {false, "cli exit " + std::to_string(r.code) + ": " + first_line(r.out)};
  g_stochastic_runs.push_back(d);
  const json j = load(d / "results.json");
  const double fs_gap = j["fredholm_vs_series"], fm = j["fredholm_vs_mc_sigmas"], sm = j["series_vs_mc_sigmas"];
  const bool ok = fs_gap <= 1e-4 && fm <= 3.0 && sm <= 3.0;
  return {ok, "fredholm " + fmt(j["fredholm"], 9) + ", series " + fmt(j["series"], 9) + ", MC " +
                  fmt(j["monte_carlo"], 6) + " +- " + fmt(j["monte_carlo_se"], 3) + "; F-S " + fmt(fs_gap, 3) +
                  ", F-MC " + fmt(fm, 3) + " se, S-MC " + fmt(sm, 3) + " se"};
}

Outcome moment_marginals() {
  const boost::math::normal gauss;
  double worst = 0;
  int grid = 0;
  for (double t : {0.25, 1.0, 2.5, 7.0})
    for (double x : {-2.0, -0.7, 0.0, 0.4, 1.9}) {
      const double v = mixed_moment({1, 1.0, t, {x}, {}, 1.0}).value;
      worst = std::max(worst, std::abs(v - boost::math::cdf(gauss, x / std::sqrt(t))));
      ++grid;
    }
  auto raw2 = [](double a, double b) { return moment_integral({2, 1.0, 1.0, {a, b}, {}, 1.0}, 120); };
  const double bc = boundary_condition_residual(raw2, 1.0, 0.5, 1e-3);
  const std::vector<double> xs{0.6, -0.2};
  const double a = mixed_moment({2, 1.0, 1.0, xs, {}, 1.0}, 120).value;
  const double b = mixed_moment({2, 1.0, 1.0, xs, margin_alphas(2), 1.0}, 120).value;
  const double c = mixed_moment({2, 1.0, 1.0, xs, {0.3, 0.9}, 1.0}, 120).value;
  const double inv = std::max(std::abs(a - b), std::abs(a - c));
  const bool ok = grid == 20 && worst <= 1e-8 && bc <= 1e-4 && inv <= 1e-8;
  return {ok, "marginal gap " + fmt(worst, 3) + " on " + std::to_string(grid) + " points, boundary residual " +
                  fmt(bc, 3) + ", abscissa spread " + fmt(inv, 3)};
}

Outcome kpz() {
  std::string detail;
  double prev = INFINITY, last = 0;
  bool monotone = true;
  for (double lambda : {10.0, 20.0, 50.0}) {
    const KpzPair p = kpz_limit_moment(1, 1.0, {0.0}, 1.0, lambda);
    const double dev = std::abs(p.flow - p.she);
    monotone = monotone && dev < prev;
    prev = last = dev;
    detail += "lambda " + fmt(lambda, 3) + ": " + fmt(dev, 3) + "  ";
  }
  return {monotone && last <= 2e-2, detail + (monotone ? "(shrinking)" : "(not monotone)")};
}

Outcome ldp_trend() {
  const fs::path d = g_dir / "c8_ldp";
  fs::remove_all(d);
  const CliRun r = cli("ldp --lambda 1 --x 1.5 --ts 5 10 20 --epsilon 0.05 --n-env 200 --seed 20261017 --out " +
                       d.string());
  if (r.code != 0) return {false, "cli exit " + std::to_string(r.code) + ": " + first_line(r.out)};
  g_stochastic_runs.push_back(d);
  const json rows = load(d / "results.json")["rows"];
  std::string detail = "|mean + lambda^2 J|:";
  double prev = INFINITY;
  bool decreasing = true;
  for (const auto& row : rows) {
    const double gap = std::abs(row["mean"].get<double>() - row["reference"].get<double>());
    decreasing = decreasing && gap < prev;
    prev = gap;
    detail += " " + fmt(gap, 4);
  }
  const auto& last = rows.back();
  const double target = -1.5 * 1.5 / 2.0;
  const double annealed = last["annealed"];
  const bool anchor = last["t"].get<double>() == 20.0 && std::abs(annealed - target) <= 0.1;
  detail += decreasing ? " (decreasing)" : " (not decreasing)";
  detail += "; annealed at t=20 " + fmt(annealed, 5) + " vs " + fmt(target, 5) + " +- 0.1 (exact walk " +
            fmt(last["annealed_exact"], 5) + ")";
  return {decreasing && anchor, detail};
}

Outcome tw_fluctuations() {
  const fs::path d = g_dir / "c9_fluctuations";
  fs::remove_all(d);
  const CliRun r = cli("fluctuations --lambda 1 --theta 0.5 --t 50 --epsilon 0.02 --n-env 500 --control-reps 20 "
                       "--seed 20261018 --out " + d.string());
  if (r.code != 0) return {false, "cli exit " + std::to_string(r.code) + ": " + first_line(r.out)};
  g_stochastic_runs.push_back(d);
  const json j = load(d / "results.json");
  const double ks = j["ks"], wins = j["control_win_fraction"];
  const auto controls = j["control_ks"].get<std::vector<double>>();
  const bool ok = ks < 0.15 && controls.size() == 20 && wins >= 0.9;
  return {ok, "KS " + fmt(ks, 4) + " (p " + fmt(j["ks_p"], 3) + "), Gaussian controls worse in " +
                  fmt(100.0 * wins, 3) + "% of " + std::to_string(controls.size()) + ", median " +
                  fmt(j["median"], 4) + " vs " + fmt(j["tw_median"], 4)};
}

Outcome determinism() {
  if (g_stochastic_runs.empty()) return {false, "no stochastic runs to replay"};
  int identical = 0;
  std::string detail;
  for (const fs::path& d : g_stochastic_runs) {
    const fs::path out = d.string() + "_replay";
    fs::remove_all(out);
    const CliRun r = cli("replay --manifest " + (d / "manifest.json").string() + " --out " + out.string());
    const bool same = r.out.find("replay identical") != std::string::npos;
    identical += same;
    detail += d.filename().string() + (same ? " identical; " : " DIFFERS; ");
  }
  const bool ok = identical == static_cast<int>(g_stochastic_runs.size()) && g_stochastic_runs.size() == 3;
  return {ok, detail + std::to_string(identical) + " of " + std::to_string(g_stochastic_runs.size()) + " manifests"};
}

}  // namespace

int main(int argc, char** argv) {
  g_dir = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "sticky_acceptance";
  for (int i = 2; i < argc; ++i) g_only.insert(std::atoi(argv[i]));
  fs::create_directories(g_dir);
  std::cout << "artifacts in " << g_dir.string() << std::endl;
  report(1, 0.1, anchors);
  report(2, 1.0, saddle_identities);
  report(3, 5.0, special_functions);
  report(4, 10.0, kummer_check);
  report(5, 600.0, laplace_crosscheck);
  report(6, 120.0, moment_marginals);
  report(7, 300.0, kpz);
  report(8, 1200.0, ldp_trend);
  report(9, 3600.0, tw_fluctuations);
  report(10, 0.0, determinism);
  std::cout << (g_failed == 0 ? "all criteria pass" : std::to_string(g_failed) + " criteria fail") << std::endl;
  return g_failed == 0 ? 0 : 1;
}
