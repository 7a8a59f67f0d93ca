#pragma once

// Configuration-driven runner behind the relmod command-line tool.  A run is
// (subcommand, action, flat key = value parameters, seed); it produces a
// results table, a JSON summary and a list of failed checks, which run()
// writes to results.csv, summary.json, plot.txt and manifest.json.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace relmod::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitTolerance = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitComputation = 3;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Params = std::map<std::string, std::string>;

struct RunConfig {
  std::string subcommand;
  std::string action;
  std::uint64_t seed = 1;
  Params params;  // after defaults, config file and overrides
  std::filesystem::path output_dir = ".";
  double tolerance_scale = 1.0;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based columns for plot.txt.
  int plot_x = 1;
  std::vector<int> plot_y;
};

struct RunResult {
  Table table;
  nlohmann::json summary;
  std::vector<std::string> failures;  // tolerance failures, one line each
  std::string headline;               // printed to stdout
};

/// `key = value` lines; '#' starts a comment.  Throws ConfigError.
Params parse_config_text(const std::string& text);

/// Default parameters of a subcommand action; throws ConfigError if unknown.
const Params& parameter_schema(const std::string& subcommand, const std::string& action);

/// Merges defaults, file parameters and overrides, rejecting unknown keys.
RunConfig make_config(const std::string& subcommand, const std::string& action,
                      const Params& file_params, const Params& overrides);

/// Runs the computation.  Throws ConfigError for invalid parameters and
/// relmod::Error for computational failures.
RunResult execute(const RunConfig& cfg);

std::string format_double(double x);  // %.17g
std::string format_csv(const Table& t);
std::string plot_script(const Table& t, const std::string& title);
std::string sha256_hex(const std::string& bytes);

/// execute() plus artifact writing; returns the process exit status.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full command-line entry point.
int main_entry(int argc, char** argv);

}  // namespace relmod::cli
