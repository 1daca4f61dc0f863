#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sticky_flows.h"

namespace sticky_cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitCertificate = 3, kExitIo = 4 };

class CliError : public std::runtime_error {
 public:
  CliError(int exit_code, const std::string& what) : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

class SchemaError : public CliError {
 public:
  explicit SchemaError(const std::string& what) : CliError(kExitUsage, "SchemaError: " + what) {}
};

int exit_code_for(sticky_status s);
// Throws CliError carrying the library message when s != STICKY_OK.
void check(sticky_status s);

std::string sha1_hex(std::string_view data);
// Hash of "blob <size>\0<content>", as git computes object ids.
std::string git_blob_sha1(std::string_view content);
std::string read_file(const fs::path& p);
void write_file(const fs::path& p, std::string_view content);

std::string format_double(double v);
std::string csv_field(std::string_view s);
std::string csv_row(const std::vector<std::string>& fields);

enum class PlotKind { ldp_trend, tw_qq, path_bundle };
PlotKind parse_plot_kind(const std::string& s);
const char* plot_kind_name(PlotKind k);
// Tab-separated table for a results document; SchemaError when the results
// come from a different experiment.
std::string emit_plot_data(const json& results, PlotKind kind);

uint64_t fresh_seed();
int default_workers();

enum class ParamType { real, integer, seed, flag, reals, text };

struct ParamSpec {
  std::string name;  // flag is --name with '_' -> '-'
  ParamType type;
  json fallback;     // null: required (seeds are drawn instead)
  std::string help;
  bool positional = false;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
  bool stochastic = false;
};

const std::vector<CommandSpec>& commands();
const CommandSpec& command_spec(const std::string& name);

struct RunOutput {
  json results;
  std::string summary;
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  bool certificate_ok = true;
  std::string certificate_note;
};

// Runs one command from a complete parameter object (no defaults applied).
RunOutput run_command(const std::string& command, const json& params);

// Runs, writes every artifact plus manifest.json to out_dir, prints the
// summary line and returns the exit code.
int execute(const std::string& command, json params, const fs::path& out_dir, std::ostream& out);

// Re-executes a manifest into out_dir and compares output hashes.
int replay(const fs::path& manifest, const fs::path& out_dir, std::ostream& out);

// Fills parameters that were left unset with their defaults and draws a seed
// when the command is stochastic and none was given.
json complete_params(const std::string& command, json params, std::ostream& log);

}  // namespace sticky_cli
