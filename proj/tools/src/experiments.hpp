#pragma once

#include "freegeom/report.hpp"
#include "freegeom/rng.hpp"
#include "freegeom_cli/cli.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace freegeom::cli {

struct ExperimentOutput {
  std::vector<CheckRow> results;
  /// {title, x_label, y_label, log_x, log_y, curves: [{label, x, y}]}, or null.
  json series;
  json diagnostics = json::object();
  /// (file stem, CSV text)
  std::vector<std::pair<std::string, std::string>> csv;
};

struct Experiment {
  std::string name;
  std::string description;
  json defaults;
  /// Parameters that must be positive (every element for arrays).
  std::vector<std::string> budgets;
  /// Overrides applied by smoke_config.
  json smoke;
  std::function<ExperimentOutput(const json& params, RngSeed seed)> run;
};

const std::vector<Experiment>& registry();
const Experiment& find_experiment(const std::string& name);

}  // namespace freegeom::cli
