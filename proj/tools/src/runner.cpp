#include "experiments.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace freegeom::cli {
namespace {

namespace fs = std::filesystem;

const std::set<std::string> kTopLevel{"experiment", "params", "seed", "output_dir", "experiments"};
const std::set<std::string> kEntry{"experiment", "params", "seed"};

bool same_kind(const json& def, const json& v) {
  if (def.is_number_float()) return v.is_number();
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_string()) return v.is_string();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_array()) {
    if (!v.is_array()) return false;
    if (def.empty()) return true;
    for (const json& e : v)
      if (!same_kind(def.front(), e)) return false;
    return true;
  }
  return false;
}

bool positive(const json& v) {
  if (v.is_array()) {
    if (v.empty()) return false;
    for (const json& e : v)
      if (!positive(e)) return false;
    return true;
  }
  return v.is_number() && v.get<double>() > 0.0;
}

std::uint64_t read_seed(const json& v, const std::string& where) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ConfigError(where + ": seed must be a non-negative integer");
  return v.get<std::uint64_t>();
}

struct Job {
  const Experiment* experiment = nullptr;
  json params;
  std::uint64_t seed = 0;
};

Job validate_entry(const json& entry, const std::set<std::string>& allowed, std::uint64_t default_seed,
                   const std::string& where) {
  if (!entry.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : entry.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown field \"" + key + "\"");
  if (!entry.contains("experiment") || !entry["experiment"].is_string())
    throw ConfigError(where + ": missing string field \"experiment\"");
  Job job;
  job.experiment = &find_experiment(entry["experiment"]);
  job.params = job.experiment->defaults;
  if (entry.contains("params")) {
    const json& p = entry["params"];
    if (!p.is_object()) throw ConfigError(where + ": \"params\" must be an object");
    for (const auto& [key, value] : p.items()) {
      if (!job.params.contains(key))
        throw ConfigError(where + ": unknown parameter \"" + key + "\" for " + job.experiment->name);
      if (!same_kind(job.params[key], value))
        throw ConfigError(where + ": parameter \"" + key + "\" has the wrong type");
      job.params[key] = value;
    }
  }
  for (const std::string& b : job.experiment->budgets)
    if (!positive(job.params[b])) throw ConfigError(where + ": budget \"" + b + "\" must be positive");
  job.seed = entry.contains("seed") ? read_seed(entry["seed"], where) : default_seed;
  return job;
}

json results_json(const std::vector<CheckRow>& rows) {
  json a = json::array();
  for (const CheckRow& r : rows)
    a.push_back(json{{"name", r.name}, {"value", r.value}, {"stderr", r.stderr}, {"bound", r.bound}, {"pass", r.pass}});
  return a;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

// Runs one job; CSVs go to out_dir with the experiment name as prefix.
json run_job(const Job& job, const fs::path& out_dir, RunOutcome& outcome, json& files) {
  ExperimentOutput o;
  try {
    o = job.experiment->run(job.params, RngSeed{job.seed, 0});
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(job.experiment->name + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(job.experiment->name + ": " + e.what());
  }
  for (const CheckRow& r : o.results)
    if (!r.pass) {
      outcome.pass = false;
      outcome.failures.push_back(job.experiment->name + "/" + r.name);
    }
  for (const auto& [stem, text] : o.csv) {
    const std::string name = job.experiment->name + "_" + stem + ".csv";
    write_file(out_dir / name, text);
    files.push_back(name);
  }
  json report;
  report["experiment"] = job.experiment->name;
  report["config"] = json{{"experiment", job.experiment->name}, {"params", job.params}, {"seed", job.seed}};
  report["results"] = results_json(o.results);
  report["seed"] = job.seed;
  report["wall_time_s"] = nullptr;
  report["series"] = o.series;
  report["diagnostics"] = o.diagnostics;
  return report;
}

}  // namespace

std::vector<ExperimentInfo> list_experiments() {
  std::vector<ExperimentInfo> out;
  for (const Experiment& e : registry()) out.push_back({e.name, e.description});
  return out;
}

json default_params(const std::string& experiment) { return find_experiment(experiment).defaults; }

json smoke_config(const std::string& experiment, std::uint64_t seed) {
  const Experiment& e = find_experiment(experiment);
  return json{{"experiment", e.name}, {"params", e.smoke}, {"seed", seed}};
}

json parse_config(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

RunOutcome run_config(const json& config, const RunOptions& opts) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : config.items())
    if (!kTopLevel.count(key)) throw ConfigError("unknown field \"" + key + "\"");
  const bool batch = config.contains("experiments");
  if (batch == config.contains("experiment"))
    throw ConfigError("config needs exactly one of \"experiment\" and \"experiments\"");
  if (batch && config.contains("params")) throw ConfigError("\"params\" belongs inside each entry of \"experiments\"");

  std::uint64_t seed = config.contains("seed") ? read_seed(config["seed"], "config") : 0;
  if (opts.seed) seed = *opts.seed;
  std::string out_dir = "results";
  if (config.contains("output_dir")) {
    if (!config["output_dir"].is_string()) throw ConfigError("\"output_dir\" must be a string");
    out_dir = config["output_dir"];
  }
  if (!opts.out_dir.empty()) out_dir = opts.out_dir;

  std::vector<Job> jobs;
  if (batch) {
    if (!config["experiments"].is_array()) throw ConfigError("\"experiments\" must be an array");
    int i = 0;
    for (const json& entry : config["experiments"]) {
      Job job = validate_entry(entry, kEntry, seed, "experiments[" + std::to_string(i++) + "]");
      // --seed overrides per-entry seeds as well.
      if (opts.seed) job.seed = *opts.seed;
      jobs.push_back(std::move(job));
    }
  } else {
    json entry = json::object();
    entry["experiment"] = config["experiment"];
    if (config.contains("params")) entry["params"] = config["params"];
    jobs.push_back(validate_entry(entry, kEntry, seed, "config"));
  }

  fs::create_directories(out_dir);
  RunOutcome outcome;
  const auto t0 = std::chrono::steady_clock::now();
  json files = json::array();
  json report;
  if (batch) {
    json reports = json::array();
    json results = json::array();
    json effective = json::array();
    for (const Job& job : jobs) {
      json r = run_job(job, out_dir, outcome, files);
      for (json row : r["results"]) {
        row["name"] = job.experiment->name + "/" + row["name"].get<std::string>();
        results.push_back(row);
      }
      effective.push_back(r["config"]);
      reports.push_back(std::move(r));
    }
    report["experiment"] = nullptr;
    report["config"] = json{{"experiments", effective}, {"seed", seed}};
    report["results"] = results;
    report["seed"] = seed;
    report["wall_time_s"] = nullptr;
    report["series"] = nullptr;
    report["reports"] = reports;
  } else {
    report = run_job(jobs.front(), out_dir, outcome, files);
  }
  report["files"] = files;
  if (opts.record_time)
    report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report["pass"] = outcome.pass;

  const fs::path path = fs::path(out_dir) / "report.json";
  write_file(path, dump_report(report));
  outcome.report = std::move(report);
  outcome.report_path = path.string();
  return outcome;
}

RunOutcome run_config_file(const std::string& path, const RunOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return run_config(parse_config(s.str()), opts);
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

}  // namespace freegeom::cli
