// Acceptance run: every criterion A1..A13 from the default experiment
// configs, one PASS/FAIL line each. Thresholds live in the experiments;
// runtime budgets are pinned here.
//
// usage: acceptance [report dir]

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "orbitlab/experiments.hpp"

using namespace orbitlab;

namespace {

struct Criterion {
  std::string id;
  std::vector<std::string> experiments;
  double budget_s;
};

const std::vector<Criterion> kCriteria = {
    {"A1", {"trace-kirillov"}, 300},
    {"A2", {"calibrate-delta"}, 120},
    {"A3", {"compose"}, 600},
    {"A4", {"equivariance"}, 600},
    {"A5", {"positivity"}, 300},
    {"A6", {"prop-A"}, 600},
    {"A7", {"prop-trace"}, 300},
    {"A8", {"sigma-scan"}, 60},
    {"A9", {"smallball"}, 1200},
    {"A10", {"frobenius-validate"}, 300},
    {"A11", {"frobenius-validate"}, 120},
    {"A12", {"eh-dyadic"}, 900},
    {"A13", {"ratner-ratio", "packing"}, 1200},
};

struct Outcome {
  bool ran = false;
  std::string error;
  ExperimentResult result;
  LockOutcome lock;
  double seconds = 0.0;
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out = argc > 1 ? argv[1] : "acceptance";
  std::map<std::string, Outcome> runs;
  for (const Criterion& c : kCriteria)
    for (const std::string& name : c.experiments) {
      if (runs.count(name)) continue;
      Outcome& o = runs[name];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const ExperimentConfig cfg = make_config(name);
        o.result = run_experiment(cfg);
        o.lock = apply_lock(o.result, cfg, false);
        write_outputs(o.result, o.lock, out + "/" + name);
        o.ran = true;
      } catch (const std::exception& e) {
        o.error = e.what();
      }
      o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cerr << name << ": " << num(o.seconds) << " s" << (o.error.empty() ? "" : " (error)") << "\n";
    }

  int failed = 0;
  for (const Criterion& c : kCriteria) {
    bool pass = true;
    double seconds = 0.0;
    std::vector<std::string> parts;
    for (const std::string& name : c.experiments) {
      const Outcome& o = runs.at(name);
      seconds += o.seconds;
      if (!o.ran) {
        pass = false;
        parts.push_back(name + " threw: " + o.error);
        continue;
      }
      for (const Check& k : o.result.checks) {
        if (k.criterion != c.id) continue;
        pass = pass && k.pass;
        parts.push_back(k.name + " " + num(k.value) + " " + k.relation + " " + num(k.threshold) +
                        (k.pass ? "" : " [fail]"));
      }
      if (o.lock.status != LockOutcome::Status::None) {
        const bool ok = o.lock.status != LockOutcome::Status::Mismatch;
        pass = pass && ok;
        parts.push_back(name + " lock " + o.lock.status_name());
      }
    }
    if (parts.empty()) {
      pass = false;
      parts.push_back("no checks recorded");
    }
    const bool in_time = seconds <= c.budget_s;
    pass = pass && in_time;
    std::string detail;
    for (const std::string& p : parts) detail += (detail.empty() ? "" : "; ") + p;
    std::printf("%-4s %s  %s; runtime %.1f s (budget %.0f s)%s\n", c.id.c_str(), pass ? "PASS" : "FAIL",
                detail.c_str(), seconds, c.budget_s, in_time ? "" : " [over budget]");
    if (!pass) ++failed;
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(kCriteria.size()) - failed, kCriteria.size());
  return failed == 0 ? 0 : 1;
}
