#include "cli_support.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

namespace sticky_cli {

int exit_code_for(sticky_status s) {
  switch (s) {
    case STICKY_OK:
      return kExitOk;
    case STICKY_E_NON_CONVERGENCE:
    case STICKY_E_TRUNCATION:
    case STICKY_E_TAIL:
    case STICKY_E_POLE_PROXIMITY:
    case STICKY_E_UNDERFLOW:
    case STICKY_E_NUMERIC:
    case STICKY_E_INTERNAL:
      return kExitCertificate;
    case STICKY_E_IO:
    case STICKY_E_SCHEMA:
      return kExitIo;
    default:
      return kExitUsage;
  }
}

void check(sticky_status s) {
  if (s != STICKY_OK) throw CliError(exit_code_for(s), std::string(sticky_status_name(s)) + ": " + sticky_last_error());
}

std::string sha1_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw CliError(kExitIo, "SHA-1 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string git_blob_sha1(std::string_view content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob.append(content);
  return sha1_hex(blob);
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw CliError(kExitIo, "cannot read " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view content) {
  std::ofstream f(p, std::ios::binary);
  if (!f || !f.write(content.data(), static_cast<std::streamsize>(content.size())))
    throw CliError(kExitIo, "cannot write " + p.string());
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string row;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) row += ',';
    row += csv_field(fields[i]);
  }
  return row + "\r\n";
}

PlotKind parse_plot_kind(const std::string& s) {
  if (s == "ldp-trend") return PlotKind::ldp_trend;
  if (s == "tw-qq") return PlotKind::tw_qq;
  if (s == "path-bundle") return PlotKind::path_bundle;
  throw SchemaError("unknown plot kind '" + s + "'");
}

const char* plot_kind_name(PlotKind k) {
  switch (k) {
    case PlotKind::ldp_trend:
      return "ldp-trend";
    case PlotKind::tw_qq:
      return "tw-qq";
    default:
      return "path-bundle";
  }
}

namespace {

void expect_command(const json& results, const char* command, PlotKind kind) {
  const std::string have = results.value("command", std::string());
  if (have != command)
    throw SchemaError(std::string(plot_kind_name(kind)) + " needs results of '" + command + "', got '" + have + "'");
}

}  // namespace

std::string emit_plot_data(const json& results, PlotKind kind) {
  std::string out;
  try {
    switch (kind) {
      case PlotKind::ldp_trend: {
        expect_command(results, "ldp", kind);
        out = "t\tmean\tse\treference\n";
        for (const auto& r : results.at("rows"))
          out += format_double(r.at("t")) + "\t" + format_double(r.at("mean")) + "\t" + format_double(r.at("se")) +
                 "\t" + format_double(r.at("reference")) + "\n";
        break;
      }
      case PlotKind::tw_qq: {
        expect_command(results, "fluctuations", kind);
        std::vector<double> z = results.at("normalized").get<std::vector<double>>();
        if (z.empty()) throw SchemaError("no samples");
        std::sort(z.begin(), z.end());
        out = "empirical\ttracy_widom\n";
        for (size_t i = 0; i < z.size(); ++i) {
          double q = 0.0;
          check(sticky_tracy_widom_quantile_fast((static_cast<double>(i) + 0.5) / static_cast<double>(z.size()), &q));
          out += format_double(z[i]) + "\t" + format_double(q) + "\n";
        }
        break;
      }
      case PlotKind::path_bundle: {
        expect_command(results, "simulate", kind);
        const auto paths = results.at("positions").get<std::vector<std::vector<double>>>();
        if (paths.empty()) throw SchemaError("no paths");
        for (size_t j = 0; j < paths.size(); ++j) out += (j ? "\tx" : "x") + std::to_string(j);
        out += "\n";
        for (size_t s = 0; s < paths[0].size(); ++s) {
          for (size_t j = 0; j < paths.size(); ++j) out += (j ? "\t" : "") + format_double(paths[j].at(s));
          out += "\n";
        }
        break;
      }
    }
  } catch (const json::exception& e) {
    throw SchemaError(e.what());
  }
  return out;
}

uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<uint64_t>(rd()) << 32) ^ rd();
}

int default_workers() {
  if (const char* v = std::getenv("STICKY_FLOWS_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && n > 0 && n <= 1024) return static_cast<int>(n);
  }
  return 1;
}

const std::vector<CommandSpec>& commands() {
  using P = ParamType;
  static const std::vector<CommandSpec> table = {
      {"rate", "rate function J at x (and lambda^2 J(x/lambda))",
       {{"x", P::real, nullptr, "location"}, {"lambda", P::real, 1.0, "stickiness"}}},
      {"saddle", "saddle point data and identities at theta",
       {{"theta", P::real, nullptr, "saddle parameter"}, {"lambda", P::real, 1.0, "stickiness"}}},
      {"laplace", "Fredholm determinant for E[exp(u K)]",
       {{"lambda", P::real, 1.0, "stickiness"},
        {"t", P::real, 1.0, "time"},
        {"x", P::real, 1.0, "threshold"},
        {"u", P::real, -1.0, "Laplace variable"},
        {"nodes", P::integer, 16, "initial nodes per contour segment"},
        {"tolerance", P::real, 1e-10, "agreement required between node doublings"},
        {"threads", P::integer, 1, "threads for kernel-matrix assembly"}}},
      {"tw-cdf", "GUE Tracy-Widom distribution function", {{"y", P::real, nullptr, "argument"}}},
      {"moment", "mixed moment by nested contour integrals",
       {{"xs", P::reals, nullptr, "starting points, nonincreasing"},
        {"lambda", P::real, 1.0, "stickiness"},
        {"t", P::real, 1.0, "time"},
        {"nodes", P::integer, 0, "nodes per axis (0: default)"}}},
      {"kpz-limit", "rescaled flow moment against the stochastic heat equation",
       {{"xs", P::reals, json::array({0.0}), "points, nondecreasing"},
        {"t", P::real, 1.0, "time"},
        {"kappa", P::real, 1.0, "noise strength"},
        {"lambda", P::real, 50.0, "probe stickiness"},
        {"nodes", P::integer, 0, "nodes per axis (0: default)"}}},
      {"simulate", "sticky path bundle from the beta random walk",
       {{"lambda", P::real, 1.0, "stickiness"},
        {"epsilon", P::real, 0.02, "lattice spacing"},
        {"t", P::real, 1.0, "time horizon"},
        {"n", P::integer, 50, "walkers"},
        {"x0", P::reals, json::array({0.0}), "starting points (one value is shared)"},
        {"seed", P::seed, nullptr, "seed (drawn when omitted)"}},
       true},
      {"ldp", "large-deviation trend of (1/t) log K",
       {{"lambda", P::real, 1.0, "stickiness"},
        {"x", P::real, 1.5, "speed x/t"},
        {"ts", P::reals, json::array({5.0, 10.0, 20.0}), "times"},
        {"epsilon", P::real, 0.05, "lattice spacing"},
        {"n_env", P::integer, 200, "environments per time"},
        {"seed", P::seed, nullptr, "seed (drawn when omitted)"},
        {"workers", P::integer, nullptr, "worker threads (default STICKY_FLOWS_WORKERS or 1)"},
        {"allow_out_of_regime", P::flag, false, "allow x below 1.35 lambda"}},
       true},
      {"fluctuations", "Tracy-Widom fluctuations of log K",
       {{"lambda", P::real, 1.0, "stickiness"},
        {"theta", P::real, 0.5, "saddle parameter"},
        {"t", P::real, 50.0, "time"},
        {"epsilon", P::real, 0.02, "lattice spacing"},
        {"n_env", P::integer, 500, "environments"},
        {"control_reps", P::integer, 20, "Gaussian control repetitions"},
        {"seed", P::seed, nullptr, "seed (drawn when omitted)"},
        {"workers", P::integer, nullptr, "worker threads (default STICKY_FLOWS_WORKERS or 1)"},
        {"allow_out_of_regime", P::flag, false, "allow theta outside (0, 1)"}},
       true},
      {"extremal", "maximum of e^{ct} walkers in one environment",
       {{"lambda", P::real, 1.0, "stickiness"},
        {"c", P::real, 1.02, "growth rate of the number of walkers"},
        {"t", P::real, 30.0, "time"},
        {"epsilon", P::real, 0.05, "lattice spacing"},
        {"n_env", P::integer, 100, "environments"},
        {"seed", P::seed, nullptr, "seed (drawn when omitted)"},
        {"workers", P::integer, nullptr, "worker threads (default STICKY_FLOWS_WORKERS or 1)"}},
       true},
      {"crosscheck", "Fredholm, moment series and Monte Carlo side by side",
       {{"target", P::text, "laplace", "laplace or moment", true},
        {"lambda", P::real, 1.0, "stickiness"},
        {"t", P::real, 1.0, "time"},
        {"x", P::real, 1.0, "threshold (laplace)"},
        {"u", P::real, -1.0, "Laplace variable (laplace)"},
        {"xs", P::reals, json::array({0.0, 0.0}), "starting points (moment)"},
        {"k_max", P::integer, 8, "series order"},
        {"series_tolerance", P::real, 1e-5, "allowed series remainder"},
        {"tolerance", P::real, 1e-4, "allowed Fredholm-series gap"},
        {"sigmas", P::real, 3.0, "allowed Monte Carlo gap in standard errors"},
        {"epsilon", P::real, 0.02, "lattice spacing"},
        {"n_env", P::integer, 100000, "environments"},
        {"seed", P::seed, nullptr, "seed (drawn when omitted)"},
        {"workers", P::integer, nullptr, "worker threads (default STICKY_FLOWS_WORKERS or 1)"}},
       true},
  };
  return table;
}

const CommandSpec& command_spec(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return c;
  throw CliError(kExitUsage, "unknown command '" + name + "'");
}

json complete_params(const std::string& command, json params, std::ostream& log) {
  const CommandSpec& spec = command_spec(command);
  if (params.is_null()) params = json::object();
  for (const auto& p : spec.params) {
    if (params.contains(p.name) && !params[p.name].is_null()) continue;
    if (p.type == ParamType::seed) {
      params[p.name] = fresh_seed();
      log << "seed " << params[p.name].get<uint64_t>() << " drawn (recorded in manifest.json)\n";
    } else if (p.name == "workers") {
      params[p.name] = default_workers();
    } else if (p.fallback.is_null()) {
      throw CliError(kExitUsage, command + ": --" + p.name + " is required");
    } else {
      params[p.name] = p.fallback;
    }
  }
  for (auto it = params.begin(); it != params.end(); ++it) {
    const bool known = std::any_of(spec.params.begin(), spec.params.end(),
                                   [&](const ParamSpec& p) { return p.name == it.key(); });
    if (!known) throw CliError(kExitUsage, command + ": unknown parameter '" + it.key() + "'");
  }
  return params;
}

namespace {

double num(const json& p, const char* k) { return p.at(k).get<double>(); }
int integer(const json& p, const char* k) { return p.at(k).get<int>(); }
uint64_t seed_of(const json& p) { return p.at("seed").get<uint64_t>(); }

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string key_value_csv(const json& results) {
  std::string csv = csv_row({"key", "value"});
  for (auto it = results.begin(); it != results.end(); ++it) {
    if (it.value().is_structured()) continue;
    csv += csv_row({it.key(), it.value().is_number_float() ? format_double(it.value().get<double>())
                              : it.value().is_string() ? it.value().get<std::string>()
                                                       : it.value().dump()});
  }
  return csv;
}

RunOutput run_rate(const json& p) {
  const double x = num(p, "x"), lambda = num(p, "lambda");
  if (!(lambda > 0.0)) throw CliError(kExitUsage, "lambda must be positive");
  double J = 0, dJ = 0, theta = 0;
  check(sticky_rate_function(x / lambda, &J));
  check(sticky_rate_function_derivative(x / lambda, &dJ));
  check(sticky_x_to_theta(x, lambda, &theta));
  RunOutput r;
  r.results = {{"J", J}, {"scaled_rate", lambda * lambda * J}, {"derivative", dJ}, {"theta", theta}};
  r.summary = lambda == 1.0 ? "J(" + g(x) + ") = " + g(J)
                            : "J(x/lambda) = " + g(J) + ", lambda^2 J(x/lambda) = " + g(lambda * lambda * J);
  return r;
}

RunOutput run_saddle(const json& p) {
  sticky_saddle s;
  check(sticky_make_saddle(num(p, "theta"), num(p, "lambda"), &s));
  double h[4], im = 0;
  for (int k = 1; k <= 3; ++k) check(sticky_saddle_h(&s, s.theta, 0.0, k, &h[k], &im));
  RunOutput r;
  const double gap3 = h[3] - 2.0 * s.sigma * s.sigma * s.sigma;
  r.results = {{"lambda", s.lambda}, {"theta", s.theta}, {"x_of_theta", s.x_of_theta}, {"J", s.J},
               {"sigma", s.sigma}, {"in_proven_regime", s.in_proven_regime != 0}, {"h1", h[1]}, {"h2", h[2]},
               {"h3_minus_2sigma3", gap3}};
  r.certificate_ok = std::abs(h[1]) <= 1e-9 && std::abs(h[2]) <= 1e-8 && std::abs(gap3) <= 1e-8;
  if (!r.certificate_ok) r.certificate_note = "saddle identities out of tolerance";
  r.summary = "x(theta) = " + g(s.x_of_theta) + ", J = " + g(s.J) + ", sigma = " + g(s.sigma);
  return r;
}

RunOutput run_laplace(const json& p) {
  sticky_det_report d;
  const double tol = num(p, "tolerance");
  check(sticky_laplace_transform(num(p, "lambda"), num(p, "t"), num(p, "x"), num(p, "u"), integer(p, "nodes"), tol,
                                 integer(p, "threads"), &d));
  RunOutput r;
  r.results = {{"value", d.value}, {"imag", d.imag}, {"last_change", d.last_change}, {"nodes", d.nodes},
               {"pivot_ratio", d.pivot_ratio}, {"inner_tail_bound", d.inner_tail_bound}};
  r.certificate_ok = d.last_change <= tol;
  if (!r.certificate_ok) r.certificate_note = "node doubling did not reach the tolerance";
  r.summary = "E[exp(u K)] = " + g(d.value) + " (change " + g(d.last_change) + ", " + std::to_string(d.nodes) + " nodes)";
  return r;
}

RunOutput run_tw(const json& p) {
  const double y = num(p, "y");
  double F = 0, delta = 0;
  check(sticky_tracy_widom_cdf(y, &F));
  check(sticky_tracy_widom_sf(y, &delta));
  RunOutput r;
  r.results = {{"y", y}, {"F", F}, {"one_minus_F", delta}};
  r.summary = y >= 0.0 ? "F_GUE(" + g(y) + ") = 1 - " + g(delta) : "F_GUE(" + g(y) + ") = " + g(F);
  return r;
}

RunOutput run_moment(const json& p) {
  const auto xs = p.at("xs").get<std::vector<double>>();
  double v = 0, tail = 0;
  check(sticky_mixed_moment(static_cast<int>(xs.size()), num(p, "lambda"), num(p, "t"), xs.data(), nullptr,
                            integer(p, "nodes"), &v, &tail));
  RunOutput r;
  r.results = {{"k", xs.size()}, {"value", v}, {"tail_bound", tail}};
  r.summary = "Phi^(" + std::to_string(xs.size()) + ") = " + g(v) + " (tail bound " + g(tail) + ")";
  return r;
}

RunOutput run_kpz(const json& p) {
  const auto xs = p.at("xs").get<std::vector<double>>();
  double flow = 0, she = 0;
  check(sticky_kpz_limit_moment(static_cast<int>(xs.size()), num(p, "t"), xs.data(), num(p, "kappa"),
                                num(p, "lambda"), integer(p, "nodes"), &flow, &she));
  RunOutput r;
  const double dev = std::abs(flow - she) / std::abs(she);
  r.results = {{"flow", flow}, {"she", she}, {"relative_deviation", dev}};
  r.summary = "flow " + g(flow) + " vs heat equation " + g(she) + " (relative deviation " + g(dev) + ")";
  return r;
}

RunOutput run_simulate(const json& p) {
  const int n = integer(p, "n");
  if (n < 1) throw CliError(kExitUsage, "n must be positive");
  auto x0 = p.at("x0").get<std::vector<double>>();
  if (x0.size() == 1) x0.assign(n, x0[0]);
  if (static_cast<int>(x0.size()) != n) throw CliError(kExitUsage, "x0 needs one value or n values");
  sticky_paths* raw = nullptr;
  check(sticky_sample_paths(num(p, "lambda"), num(p, "epsilon"), num(p, "t"), n, x0.data(), seed_of(p), &raw));
  std::unique_ptr<sticky_paths, decltype(&sticky_paths_destroy)> paths(raw, sticky_paths_destroy);
  int64_t steps = 0;
  double eps = 0;
  check(sticky_paths_info(paths.get(), nullptr, &steps, &eps));
  json pos = json::array();
  std::string csv = csv_row({"walker", "step", "time", "position"});
  std::vector<double> buf(static_cast<size_t>(steps) + 1);
  for (int j = 0; j < n; ++j) {
    check(sticky_paths_positions(paths.get(), j, buf.data(), buf.size()));
    pos.push_back(buf);
    for (size_t s = 0; s < buf.size(); ++s)
      csv += csv_row({std::to_string(j), std::to_string(s), format_double(eps * eps * static_cast<double>(s)),
                      format_double(buf[s])});
  }
  RunOutput r;
  r.results = {{"steps", steps}, {"positions", pos}};
  r.files.emplace_back("results.csv", csv);
  r.summary = std::to_string(n) + " walkers, " + std::to_string(steps) + " steps";
  return r;
}

RunOutput run_ldp(const json& p) {
  const auto ts = p.at("ts").get<std::vector<double>>();
  sticky_ldp_config c;
  sticky_ldp_config_default(&c);
  c.lambda = num(p, "lambda");
  c.x_over_t = num(p, "x");
  c.ts = ts.data();
  c.n_ts = ts.size();
  c.epsilon = num(p, "epsilon");
  c.n_env = integer(p, "n_env");
  c.seed = seed_of(p);
  c.workers = integer(p, "workers");
  c.allow_out_of_regime = p.at("allow_out_of_regime").get<bool>();
  sticky_ldp_result* raw = nullptr;
  check(sticky_ldp_run(&c, &raw));
  std::unique_ptr<sticky_ldp_result, decltype(&sticky_ldp_destroy)> res(raw, sticky_ldp_destroy);
  RunOutput r;
  json rows = json::array();
  std::string csv = csv_row({"t", "environment", "rate"});
  r.summary = "|mean - reference|:";
  for (size_t i = 0; i < sticky_ldp_row_count(res.get()); ++i) {
    sticky_ldp_row w;
    check(sticky_ldp_get_row(res.get(), i, &w));
    std::vector<double> rates(c.n_env);
    check(sticky_ldp_rates(res.get(), i, rates.data(), rates.size()));
    rows.push_back({{"t", w.t}, {"steps", w.steps}, {"threshold", w.threshold}, {"mean", w.mean},
                    {"variance", w.variance}, {"se", w.se}, {"reference", w.reference}, {"annealed", w.annealed},
                    {"annealed_exact", w.annealed_exact}, {"rates", rates}});
    for (size_t e = 0; e < rates.size(); ++e) csv += csv_row({format_double(w.t), std::to_string(e), format_double(rates[e])});
    r.summary += " t=" + g(w.t) + ": " + g(std::abs(w.mean - w.reference));
  }
  r.results = {{"rows", rows}};
  r.files.emplace_back("results.csv", csv);
  return r;
}

RunOutput run_fluctuations(const json& p) {
  sticky_fluct_config c;
  sticky_fluct_config_default(&c);
  c.lambda = num(p, "lambda");
  c.theta = num(p, "theta");
  c.t = num(p, "t");
  c.epsilon = num(p, "epsilon");
  c.n_env = integer(p, "n_env");
  c.control_reps = integer(p, "control_reps");
  c.seed = seed_of(p);
  c.workers = integer(p, "workers");
  c.allow_out_of_regime = p.at("allow_out_of_regime").get<bool>();
  sticky_fluct_result* raw = nullptr;
  check(sticky_fluct_run(&c, &raw));
  std::unique_ptr<sticky_fluct_result, decltype(&sticky_fluct_destroy)> res(raw, sticky_fluct_destroy);
  sticky_fluct_summary s;
  check(sticky_fluct_summary_get(res.get(), &s));
  std::vector<sticky_fluct_sample> samples(s.n_samples);
  check(sticky_fluct_samples(res.get(), samples.data(), samples.size()));
  std::vector<double> controls(s.n_controls);
  if (s.n_controls > 0) check(sticky_fluct_control_ks(res.get(), controls.data(), controls.size()));
  std::vector<double> logk, z;
  std::string csv = csv_row({"environment", "t", "x_target", "log_kernel", "normalized"});
  for (size_t i = 0; i < samples.size(); ++i) {
    logk.push_back(samples[i].log_kernel);
    z.push_back(samples[i].normalized);
    csv += csv_row({std::to_string(i), format_double(samples[i].t), format_double(samples[i].x_target),
                    format_double(samples[i].log_kernel), format_double(samples[i].normalized)});
  }
  RunOutput r;
  r.results = {{"saddle", {{"lambda", s.saddle.lambda}, {"theta", s.saddle.theta}, {"x_of_theta", s.saddle.x_of_theta},
                           {"J", s.saddle.J}, {"sigma", s.saddle.sigma}}},
               {"steps", s.steps},
               {"threshold", s.threshold},
               {"ks", s.ks},
               {"ks_p", s.ks_p},
               {"median", s.median},
               {"tw_median", s.tw_median},
               {"control_ks", controls},
               {"control_win_fraction", s.control_win_fraction},
               {"log_kernel", logk},
               {"normalized", z}};
  r.files.emplace_back("results.csv", csv);
  r.summary = "KS " + g(s.ks) + " (p " + g(s.ks_p) + "), median " + g(s.median) + " vs " + g(s.tw_median) +
              ", controls worse in " + g(100.0 * s.control_win_fraction) + "%";
  return r;
}

RunOutput run_extremal(const json& p) {
  sticky_extremal_config c;
  sticky_extremal_config_default(&c);
  c.lambda = num(p, "lambda");
  c.c = num(p, "c");
  c.t = num(p, "t");
  c.epsilon = num(p, "epsilon");
  c.n_env = integer(p, "n_env");
  c.seed = seed_of(p);
  c.workers = integer(p, "workers");
  sticky_extremal_result* raw = nullptr;
  check(sticky_extremal_run(&c, &raw));
  std::unique_ptr<sticky_extremal_result, decltype(&sticky_extremal_destroy)> res(raw, sticky_extremal_destroy);
  sticky_extremal_summary s;
  check(sticky_extremal_summary_get(res.get(), &s));
  std::vector<double> loc(s.n), nz(s.n);
  check(sticky_extremal_samples(res.get(), loc.data(), nz.data(), loc.size()));
  std::string csv = csv_row({"environment", "max_location", "normalized"});
  for (int i = 0; i < s.n; ++i) csv += csv_row({std::to_string(i), format_double(loc[i]), format_double(nz[i])});
  RunOutput r;
  r.results = {{"x0", s.x0},         {"theta0", s.theta0},           {"sigma0", s.sigma0},
               {"slope", s.slope},   {"log_n", s.log_n},             {"mean_over_t", s.mean_over_t},
               {"max_location", loc}, {"normalized", nz}};
  r.files.emplace_back("results.csv", csv);
  r.summary = "mean max / t = " + g(s.mean_over_t) + " vs x0 = " + g(s.x0);
  return r;
}

RunOutput run_crosscheck(const json& p) {
  const std::string target = p.at("target").get<std::string>();
  const double lambda = num(p, "lambda"), t = num(p, "t"), sigmas = num(p, "sigmas");
  RunOutput r;
  std::string csv = csv_row({"method", "value", "se"});
  if (target == "laplace") {
    const double x = num(p, "x"), u = num(p, "u");
    sticky_det_report d;
    check(sticky_laplace_transform(lambda, t, x, u, 0, 0, 1, &d));
    sticky_series s;
    check(sticky_laplace_via_moments(lambda, t, x, u, integer(p, "k_max"), num(p, "series_tolerance"), 0, &s));
    sticky_mc_estimate m;
    check(sticky_laplace_mc(lambda, t, x, u, num(p, "epsilon"), integer(p, "n_env"), seed_of(p), integer(p, "workers"),
                            &m));
    const double fs = std::abs(d.value - s.value);
    const double fm = std::abs(d.value - m.mean) / m.se, sm = std::abs(s.value - m.mean) / m.se;
    const bool ok_fs = fs <= num(p, "tolerance"), ok_fm = fm <= sigmas, ok_sm = sm <= sigmas;
    r.results = {{"fredholm", d.value},
                 {"fredholm_change", d.last_change},
                 {"series", s.value},
                 {"series_remainder_bound", s.remainder_bound},
                 {"monte_carlo", m.mean},
                 {"monte_carlo_se", m.se},
                 {"monte_carlo_cells", m.cells},
                 {"clamps", m.clamps},
                 {"fredholm_vs_series", fs},
                 {"fredholm_vs_mc_sigmas", fm},
                 {"series_vs_mc_sigmas", sm},
                 {"pass_fredholm_series", ok_fs},
                 {"pass_fredholm_mc", ok_fm},
                 {"pass_series_mc", ok_sm}};
    csv += csv_row({"fredholm", format_double(d.value), ""});
    csv += csv_row({"moment-series", format_double(s.value), format_double(s.remainder_bound)});
    csv += csv_row({"monte-carlo", format_double(m.mean), format_double(m.se)});
    r.certificate_ok = ok_fs && ok_fm && ok_sm;
    r.summary = "fredholm " + g(d.value) + " | series " + g(s.value) + " | monte carlo " + g(m.mean) + " +- " +
                g(m.se) + "  gaps: F-S " + g(fs) + ", F-MC " + g(fm) + " se, S-MC " + g(sm) + " se";
  } else if (target == "moment") {
    const auto xs = p.at("xs").get<std::vector<double>>();
    double v = 0, tail = 0;
    check(sticky_mixed_moment(static_cast<int>(xs.size()), lambda, t, xs.data(), nullptr, 0, &v, &tail));
    sticky_mc_estimate m;
    check(sticky_moment_mc(static_cast<int>(xs.size()), lambda, t, xs.data(), num(p, "epsilon"), integer(p, "n_env"),
                           seed_of(p), integer(p, "workers"), &m));
    const double gap = std::abs(v - m.mean) / m.se;
    r.results = {{"contour", v}, {"tail_bound", tail}, {"monte_carlo", m.mean}, {"monte_carlo_se", m.se},
                 {"contour_vs_mc_sigmas", gap}, {"pass_contour_mc", gap <= sigmas}};
    csv += csv_row({"contour", format_double(v), ""});
    csv += csv_row({"monte-carlo", format_double(m.mean), format_double(m.se)});
    r.certificate_ok = gap <= sigmas;
    r.summary = "contour " + g(v) + " | monte carlo " + g(m.mean) + " +- " + g(m.se) + " (" + g(gap) + " se)";
  } else {
    throw CliError(kExitUsage, "crosscheck target must be laplace or moment");
  }
  if (!r.certificate_ok) r.certificate_note = "cross-check gap above tolerance";
  r.files.emplace_back("results.csv", csv);
  return r;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunOutput run_command(const std::string& command, const json& params) {
  RunOutput r;
  try {
    if (command == "rate") r = run_rate(params);
    else if (command == "saddle") r = run_saddle(params);
    else if (command == "laplace") r = run_laplace(params);
    else if (command == "tw-cdf") r = run_tw(params);
    else if (command == "moment") r = run_moment(params);
    else if (command == "kpz-limit") r = run_kpz(params);
    else if (command == "simulate") r = run_simulate(params);
    else if (command == "ldp") r = run_ldp(params);
    else if (command == "fluctuations") r = run_fluctuations(params);
    else if (command == "extremal") r = run_extremal(params);
    else if (command == "crosscheck") r = run_crosscheck(params);
    else throw CliError(kExitUsage, "unknown command '" + command + "'");
  } catch (const json::exception& e) {
    throw CliError(kExitUsage, std::string("bad parameters: ") + e.what());
  }
  r.results["command"] = command;
  r.results["parameters"] = params;
  r.results["certificate_ok"] = r.certificate_ok;
  if (!r.files.empty() && r.files.front().first == "results.csv") return r;
  r.files.emplace(r.files.begin(), "results.csv", key_value_csv(r.results));
  return r;
}

int execute(const std::string& command, json params, const fs::path& out_dir, std::ostream& out) {
  params = complete_params(command, std::move(params), out);
  const std::string started = utc_now();
  RunOutput r = run_command(command, params);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw CliError(kExitIo, "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("results.json", r.results.dump(2) + "\n");
  for (auto& f : r.files) files.push_back(std::move(f));
  const std::pair<const char*, PlotKind> plots[] = {
      {"ldp", PlotKind::ldp_trend}, {"fluctuations", PlotKind::tw_qq}, {"simulate", PlotKind::path_bundle}};
  for (const auto& [cmd, kind] : plots)
    if (command == cmd) files.emplace_back(std::string(plot_kind_name(kind)) + ".tsv", emit_plot_data(r.results, kind));

  json outputs = json::array();
  for (const auto& [name, content] : files) {
    write_file(out_dir / name, content);
    outputs.push_back({{"file", name}, {"sha1", git_blob_sha1(content)}});
  }
  const CommandSpec& spec = command_spec(command);
  json manifest = {{"command", command},
                   {"parameters", params},
                   {"seeds", spec.stochastic ? json::array({params.at("seed")}) : json::array()},
                   {"tool_version", sticky_version()},
                   {"input_hashes", json::array({{{"name", "parameters"}, {"sha1", git_blob_sha1(params.dump())}}})},
                   {"outputs", outputs},
                   {"certificate_ok", r.certificate_ok},
                   {"started", started},
                   {"finished", utc_now()}};
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  out << command << ": " << r.summary << "\n";
  if (!r.certificate_ok) {
    out << "certificate failed: " << r.certificate_note << "\n";
    return kExitCertificate;
  }
  return kExitOk;
}

int replay(const fs::path& manifest_path, const fs::path& out_dir, std::ostream& out) {
  json m;
  try {
    m = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw CliError(kExitIo, "SchemaError: manifest is not valid JSON: " + std::string(e.what()));
  }
  if (!m.contains("command") || !m.contains("parameters") || !m.contains("outputs"))
    throw CliError(kExitIo, "SchemaError: manifest lacks command, parameters or outputs");
  if (fs::exists(out_dir) && fs::equivalent(out_dir, manifest_path.parent_path()))
    throw CliError(kExitUsage, "replay needs an output directory different from the manifest's");
  const int code = execute(m["command"].get<std::string>(), m["parameters"], out_dir, out);
  int mismatches = 0;
  for (const auto& o : m["outputs"]) {
    const std::string name = o.at("file").get<std::string>();
    const std::string now = git_blob_sha1(read_file(out_dir / name));
    if (now != o.at("sha1").get<std::string>()) {
      out << "replay mismatch: " << name << "\n";
      ++mismatches;
    }
  }
  if (mismatches) return kExitCertificate;
  out << "replay identical: " << m["outputs"].size() << " files\n";
  return code;
}

}  // namespace sticky_cli
