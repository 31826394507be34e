#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace freegeom::cli {

using json = nlohmann::ordered_json;

/// Invalid or malformed configuration; maps to exit status 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Report without a plottable series; maps to exit status 1.
struct PlotError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentInfo {
  std::string name;
  std::string description;
};

/// Registered experiments in a fixed order.
std::vector<ExperimentInfo> list_experiments();

/// Default parameters of an experiment; throws ConfigError for unknown names.
json default_params(const std::string& experiment);

/// A small-budget config for the experiment, used for quick reproducibility runs.
json smoke_config(const std::string& experiment, std::uint64_t seed);

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the config seed
  std::string out_dir;                // overrides the config output_dir when non-empty
  bool record_time = false;           // wall_time_s stays null otherwise
};

struct RunOutcome {
  json report;
  bool pass = true;
  /// "experiment/check" for every failed check.
  std::vector<std::string> failures;
  std::string report_path;
};

/// Throws ConfigError on malformed JSON.
json parse_config(const std::string& text);

/// Validates, runs and writes report.json plus data CSVs into the output directory.
RunOutcome run_config(const json& config, const RunOptions& opts);
RunOutcome run_config_file(const std::string& path, const RunOptions& opts);

/// Deterministic text for a report.
std::string dump_report(const json& report);

/// Standalone SVG of the report's primary series.
std::string render_svg(const json& report);

}  // namespace freegeom::cli
