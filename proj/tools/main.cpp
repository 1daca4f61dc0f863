#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_support.hpp"

using namespace sticky_cli;

namespace {

std::string flag_name(std::string s) {
  for (char& c : s)
    if (c == '_') c = '-';
  return s;
}

double parse_real(const std::string& flag, const std::string& s) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw CliError(kExitUsage, "--" + flag + ": not a number: '" + s + "'");
  return v;
}

json convert(const ParamSpec& p, const std::vector<std::string>& raw) {
  const std::string flag = flag_name(p.name);
  switch (p.type) {
    case ParamType::real:
      return parse_real(flag, raw.at(0));
    case ParamType::integer: {
      const double v = parse_real(flag, raw.at(0));
      if (v != static_cast<double>(static_cast<long long>(v))) throw CliError(kExitUsage, "--" + flag + ": not an integer");
      return static_cast<long long>(v);
    }
    case ParamType::seed: {
      size_t used = 0;
      uint64_t v = 0;
      try {
        v = std::stoull(raw.at(0), &used, 0);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != raw.at(0).size() || raw.at(0).front() == '-')
        throw CliError(kExitUsage, "--" + flag + ": not an unsigned 64-bit integer");
      return v;
    }
    case ParamType::reals: {
      json a = json::array();
      for (const auto& s : raw) a.push_back(parse_real(flag, s));
      return a;
    }
    case ParamType::text:
      return raw.at(0);
    case ParamType::flag:
      return true;
  }
  return nullptr;
}

struct Bound {
  const CommandSpec* spec;
  CLI::App* app;
  std::map<std::string, std::vector<std::string>> values;
  std::map<std::string, bool> flags;
  std::string out = "sticky-out";
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sticky Brownian flows: exact evaluation, simulation and experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sticky_version());

  std::vector<std::unique_ptr<Bound>> bound;
  for (const auto& spec : commands()) {
    auto b = std::make_unique<Bound>();
    b->spec = &spec;
    b->app = app.add_subcommand(spec.name, spec.help);
    for (const auto& p : spec.params) {
      std::string desc = p.help;
      if (!p.fallback.is_null()) desc += " [default " + p.fallback.dump() + "]";
      if (p.type == ParamType::flag) {
        b->app->add_flag("--" + flag_name(p.name), b->flags[p.name], desc);
        continue;
      }
      auto& slot = b->values[p.name];
      CLI::Option* o = b->app->add_option(p.positional ? p.name : "--" + flag_name(p.name), slot, desc);
      if (p.type == ParamType::reals)
        o->expected(1, -1)->delimiter(',');
      else
        o->expected(1);
    }
    b->app->add_option("--out", b->out, "artifact directory")->capture_default_str();
    bound.push_back(std::move(b));
  }

  std::string manifest, replay_out = "sticky-replay";
  CLI::App* rep = app.add_subcommand("replay", "re-run a manifest and compare outputs bit for bit");
  rep->add_option("--manifest", manifest, "manifest.json of an earlier run")->required();
  rep->add_option("--out", replay_out, "artifact directory")->capture_default_str();

  std::string results_path, kind, plot_out = "sticky-plot";
  CLI::App* plot = app.add_subcommand("plot", "tab-separated plot table from a results.json");
  plot->add_option("--results", results_path, "results.json")->required();
  plot->add_option("--kind", kind, "ldp-trend, tw-qq or path-bundle")->required();
  plot->add_option("--out", plot_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (rep->parsed()) return replay(manifest, replay_out, std::cout);
    if (plot->parsed()) {
      const PlotKind k = parse_plot_kind(kind);
      json results;
      try {
        results = json::parse(read_file(results_path));
      } catch (const json::exception& e) {
        throw SchemaError(std::string("results file is not JSON: ") + e.what());
      }
      const std::string table = emit_plot_data(results, k);
      std::error_code ec;
      fs::create_directories(plot_out, ec);
      if (ec) throw CliError(kExitIo, "cannot create " + plot_out);
      const fs::path file = fs::path(plot_out) / (std::string(plot_kind_name(k)) + ".tsv");
      write_file(file, table);
      std::cout << "plot: wrote " << file.string() << "\n";
      return kExitOk;
    }
    for (auto& b : bound) {
      if (!b->app->parsed()) continue;
      json params = json::object();
      for (const auto& p : b->spec->params) {
        if (p.type == ParamType::flag) {
          params[p.name] = b->flags[p.name];
          continue;
        }
        const auto& raw = b->values[p.name];
        if (!raw.empty()) params[p.name] = convert(p, raw);
      }
      return execute(b->spec->name, params, b->out, std::cout);
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  }
  return kExitUsage;
}
