#include "freegeom_cli/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace freegeom::cli;

namespace {

int cmd_run(const std::string& config, const RunOptions& opts) {
  try {
    RunOutcome r = run_config_file(config, opts);
    for (const std::string& f : r.failures) std::cerr << "check failed: " << f << "\n";
    std::cout << r.report_path << "\n";
    return r.pass ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_list() {
  for (const ExperimentInfo& e : list_experiments()) std::printf("%-28s %s\n", e.name.c_str(), e.description.c_str());
  return 0;
}

int cmd_plot(const std::string& report_path, const std::string& out) {
  std::ifstream in(report_path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot read " << report_path << "\n";
    return 2;
  }
  std::ostringstream s;
  s << in.rdbuf();
  json report;
  try {
    report = json::parse(s.str());
  } catch (const json::parse_error& e) {
    std::cerr << "malformed report: " << e.what() << "\n";
    return 2;
  }
  try {
    const std::string svg = render_svg(report);
    std::ofstream o(out, std::ios::binary);
    if (!o) {
      std::cerr << "cannot write " << out << "\n";
      return 2;
    }
    o << svg;
  } catch (const PlotError& e) {
    std::cerr << "plot: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"freegeom experiment runner"};
  app.require_subcommand(1);

  std::string config, out_dir, report, svg;
  std::uint64_t seed = 0;
  bool record_time = false;

  CLI::App* run = app.add_subcommand("run", "Run the experiments of a JSON config");
  run->add_option("--config", config, "Config file")->required();
  CLI::Option* seed_opt = run->add_option("--seed", seed, "Seed overriding the config");
  run->add_option("--out", out_dir, "Output directory overriding the config");
  run->add_flag("--record-time", record_time, "Record wall time in the report");

  app.add_subcommand("list", "List registered experiments");

  CLI::App* plot = app.add_subcommand("plot", "Plot the primary series of a report as SVG");
  plot->add_option("--report", report, "report.json")->required();
  plot->add_option("--out", svg, "Output SVG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*run) {
    RunOptions opts;
    if (*seed_opt) opts.seed = seed;
    opts.out_dir = out_dir;
    opts.record_time = record_time;
    return cmd_run(config, opts);
  }
  if (*plot) return cmd_plot(report, svg);
  return cmd_list();
}
