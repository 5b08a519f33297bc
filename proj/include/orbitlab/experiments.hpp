#pragma once

// Experiment runner: the named experiments behind the command line, their
// reports and regression locks.
//
// A run produces a JSON report (resolved config, versions, data, checks),
// CSV tables and, for experiments that record constants, a lock file. The
// report carries no timings or timestamps, so identical configs give
// byte-identical reports.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbitlab/config.hpp"

namespace orbitlab {

struct Check {
  std::string criterion;  // "A1" ... or "" for auxiliary checks
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=", "<", ">=", ">"
  double threshold = 0.0;
  bool pass = false;
  std::string note;
  nlohmann::json to_json() const;
};

Check make_check(const std::string& criterion, const std::string& name, double value, const std::string& relation,
                 double threshold, const std::string& note = "");

// A recorded constant: re-runs must land within max(abs_tol, rel_tol |value|).
struct LockedValue {
  std::string name;
  double value = 0.0;
  double rel_tol = 1e-6;
  double abs_tol = 0.0;
};

struct ExperimentResult {
  std::string experiment;
  nlohmann::json config;
  nlohmann::json data = nlohmann::json::object();
  std::vector<Check> checks;
  std::vector<LockedValue> locked;
  std::map<std::string, std::string> tables;  // file name -> CSV text
  bool pass() const;
  nlohmann::json report() const;
};

struct ExperimentDef {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;
  // Module preconditions, run at parse time. Throws ConfigError or ParameterError.
  std::function<void(const ExperimentConfig&)> validate;
  std::function<ExperimentResult(const ExperimentConfig&)> run;
};

const std::vector<ExperimentDef>& experiment_registry();
const ExperimentDef& find_experiment(const std::string& name);

// Schema defaults overlaid by `raw`, then the module preconditions.
ExperimentConfig make_config(const std::string& name, const RawConfig& raw = {});
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct LockOutcome {
  enum class Status { None, Created, Matched, Refreshed, Mismatch };
  Status status = Status::None;
  std::string path;
  std::vector<std::string> lines;  // side-by-side table on mismatch
  std::string status_name() const;
};

// Lock file: <lock_dir>/<experiment>-<config hash>.json. The lock directory is
// experiment.lock_dir, else ORBITLAB_LOCK_DIR, else the locks/ directory of
// the source tree.
std::string lock_path(const ExperimentConfig& cfg);
LockOutcome apply_lock(const ExperimentResult& res, const ExperimentConfig& cfg, bool refresh);

// report.json, the CSV tables and lock.json (the outcome) under dir.
void write_outputs(const ExperimentResult& res, const LockOutcome& lock, const std::string& dir);

// Exit status: 0 all checks pass, 1 a check failed, 2 lock mismatch.
int exit_status(const ExperimentResult& res, const LockOutcome& lock);

// Data file lookup: the path as given, else relative to the data directory.
std::string resolve_data_path(const std::string& path);

nlohmann::json version_info();

}  // namespace orbitlab
