// orbitlab <experiment> [--config file] [--out dir] [--refresh-lock] [--threads n]
//
// Exit status: 0 checks pass, 1 a check failed, 2 regression lock mismatch,
// 3 bad config, 4 numerical or module error.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>

#include "orbitlab/config.hpp"
#include "orbitlab/experiments.hpp"

using namespace orbitlab;

namespace {

struct Options {
  std::string config;
  std::string out;
  bool refresh = false;
  int threads = 0;
};

void print_schema(const ExperimentDef& d) {
  std::cout << d.name << ": " << d.summary << "\n";
  std::vector<ParamSpec> all = common_params();
  for (const ParamSpec& p : d.params) {
    bool replaced = false;
    for (ParamSpec& q : all)
      if (q.key == p.key) {
        q = p;
        replaced = true;
      }
    if (!replaced) all.push_back(p);
  }
  for (const ParamSpec& p : all)
    std::cout << "  " << std::left << std::setw(30) << p.key << std::setw(28) << p.def.dump() << " " << p.help << "\n";
}

int run(const std::string& name, const Options& opt) {
  const RawConfig raw = opt.config.empty() ? RawConfig{} : load_config_file(opt.config);
  ExperimentConfig cfg = make_config(name, raw);
  if (!opt.out.empty()) cfg.params["experiment.out"] = opt.out;
  if (opt.threads > 0) cfg.params["experiment.threads"] = opt.threads;
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult res = run_experiment(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const LockOutcome lock = apply_lock(res, cfg, opt.refresh);
  const std::string dir = (std::filesystem::path(cfg.out_dir()) / name).string();
  write_outputs(res, lock, dir);

  for (const Check& c : res.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << std::left << std::setw(5)
              << (c.criterion.empty() ? "-" : c.criterion) << c.name << ": " << c.value << " " << c.relation << " "
              << c.threshold << "\n";
  if (lock.status != LockOutcome::Status::None) {
    std::cout << "lock " << lock.status_name() << " (" << lock.path << ")\n";
    if (lock.status == LockOutcome::Status::Mismatch)
      for (const std::string& line : lock.lines) std::cout << "  " << line << "\n";
  }
  std::cout << "report " << dir << "/report.json\n";
  std::cerr << name << " finished in " << std::fixed << std::setprecision(1) << secs << " s\n";
  return exit_status(res, lock);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orbitlab: semiclassical experiments on SL(2,R)"};
  app.require_subcommand(1);
  Options opt;
  std::string listed;

  for (const ExperimentDef& d : experiment_registry()) {
    CLI::App* sub = app.add_subcommand(d.name, d.summary);
    sub->add_option("--config", opt.config, "config file (key = value, sections [experiment] [symbol] [grid])")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (default: experiment.out)");
    sub->add_flag("--refresh-lock", opt.refresh, "overwrite the regression lock with this run");
    sub->add_option("--threads", opt.threads, "assembly threads")->check(CLI::PositiveNumber);
  }
  CLI::App* list = app.add_subcommand("list", "show the experiments and their config keys");
  list->add_option("experiment", listed, "only this experiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (list->parsed()) {
      if (!listed.empty())
        print_schema(find_experiment(listed));
      else
        for (const ExperimentDef& d : experiment_registry()) print_schema(d);
      return 0;
    }
    for (const ExperimentDef& d : experiment_registry())
      if (app.got_subcommand(d.name)) return run(d.name, opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << e.kind() << " error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
