#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "orbitlab/experiments.hpp"

using namespace orbitlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("orbitlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig config(const std::string& name, const std::string& text) {
  return make_config(name, parse_config_text(text, "t.conf"));
}

}  // namespace

TEST_CASE("registry lists the command line experiments") {
  const std::set<std::string> want = {"trace-kirillov", "calibrate-delta", "compose",      "equivariance",
                                      "positivity",     "prop-A",          "prop-trace",   "smallball",
                                      "sigma-scan",     "frobenius-validate", "eh-dyadic", "eh-smallball",
                                      "packing",        "tube-count",      "ratner-ratio"};
  std::set<std::string> got;
  for (const ExperimentDef& d : experiment_registry()) got.insert(d.name);
  CHECK(got == want);
  CHECK_THROWS_AS(find_experiment("nope"), ConfigError);
  // every default config resolves and validates
  for (const ExperimentDef& d : experiment_registry()) CHECK_NOTHROW(make_config(d.name));
}

TEST_CASE("module preconditions at parse time") {
  CHECK_THROWS_AS(config("compose", "[symbol]\nxi0 = 1, 0, 0\n"), ConfigError);
  CHECK_THROWS_AS(config("compose", "[grid]\nhbar = 0.1, 0.2, 0.05\n"), ConfigError);
  CHECK_THROWS_AS(config("compose", "[grid]\nhbar = 0.2, 0.1\n"), ConfigError);
  CHECK_THROWS_AS(config("smallball", "[experiment]\ntheta = 0.9\n"), ConfigError);
  CHECK_THROWS_AS(config("smallball", "[experiment]\nfunctional = maass\nfunctional_K = 1024\n"), ConfigError);
  CHECK_THROWS_AS(config("prop-trace", "[experiment]\ns = 1.0\n"), ConfigError);
  CHECK_THROWS_AS(config("calibrate-delta", "[grid]\nK = 64, 66\n"), ConfigError);
  CHECK_THROWS_AS(config("calibrate-delta", "[experiment]\nmax_K = 100\n"), ConfigError);
  CHECK_THROWS_AS(config("ratner-ratio", "[experiment]\ng = 1, 1, 1, 1\n"), ConfigError);
  CHECK_THROWS_AS(config("ratner-ratio", "[experiment]\nrho_small = 0.4\n"), ConfigError);
  CHECK_THROWS_AS(config("eh-dyadic", "[experiment]\ndata = missing.txt\n"), ConfigError);
  CHECK_THROWS_AS(config("packing", "[experiment]\nradius = 2.9\ncenter = 8, 0, 0, 0.125\n"), ConfigError);
  CHECK_THROWS_AS(config("packing", "[symbol]\nsigma = 1\n"), ConfigError);
}

TEST_CASE("checks") {
  CHECK(make_check("A1", "x", 0.9, ">=", 0.8).pass);
  CHECK_FALSE(make_check("A1", "x", 0.7, ">=", 0.8).pass);
  CHECK(make_check("A1", "x", 1.0, "<=", 1.0).pass);
  CHECK_FALSE(make_check("A1", "x", 1.0, "<", 1.0).pass);
  CHECK_FALSE(make_check("A1", "x", NAN, "<", 1.0).pass);
  CHECK_THROWS_AS(make_check("A1", "x", 1.0, "~", 1.0), ParameterError);
}

TEST_CASE("reports are deterministic and embed the config") {
  const ExperimentConfig c = config("sigma-scan", "[grid]\ndelta = 0.2, 0.3\n");
  const ExperimentResult a = run_experiment(c), b = run_experiment(c);
  CHECK(a.report().dump() == b.report().dump());
  CHECK(a.pass());
  CHECK(a.checks.size() == 6);
  const nlohmann::json r = a.report();
  CHECK(r.at("config").at("params").at("grid.delta").size() == 2);
  CHECK(r.at("versions").contains("orbitlab"));
  CHECK(r.at("versions").contains("fftw"));

  const fs::path dir = scratch("report");
  write_outputs(a, LockOutcome{}, dir.string());
  CHECK(fs::exists(dir / "report.json"));
  CHECK(slurp(dir / "sigma.csv").rfind("delta,theta,kappa,eps,sigma_fit,sigma_closed\n", 0) == 0);
  const std::string first = slurp(dir / "report.json");
  write_outputs(b, LockOutcome{}, dir.string());
  CHECK(slurp(dir / "report.json") == first);
  fs::remove_all(dir);
}

TEST_CASE("regression lock cycle") {
  const fs::path locks = scratch("locks");
  const ExperimentConfig c = config("packing", "[experiment]\nn = 6\nlock_dir = " + locks.string() + "\n");
  const ExperimentResult res = run_experiment(c);
  REQUIRE_FALSE(res.locked.empty());
  CHECK(res.pass());

  LockOutcome o = apply_lock(res, c, false);
  CHECK(o.status == LockOutcome::Status::Created);
  CHECK(fs::exists(o.path));
  CHECK(o.path == lock_path(c));
  o = apply_lock(res, c, false);
  CHECK(o.status == LockOutcome::Status::Matched);
  CHECK(exit_status(res, o) == 0);

  // a changed constant is reported side by side and exits with 2
  ExperimentResult moved = res;
  moved.locked[0].value *= 1.01;
  o = apply_lock(moved, c, false);
  CHECK(o.status == LockOutcome::Status::Mismatch);
  CHECK(exit_status(moved, o) == 2);
  REQUIRE(o.lines.size() >= 2);
  CHECK(o.lines[1].find("MISMATCH") != std::string::npos);

  o = apply_lock(moved, c, true);
  CHECK(o.status == LockOutcome::Status::Refreshed);
  CHECK(apply_lock(moved, c, false).status == LockOutcome::Status::Matched);

  // a different config gets its own lock
  const ExperimentConfig c2 = config("packing", "[experiment]\nn = 8\nlock_dir = " + locks.string() + "\n");
  CHECK(lock_path(c2) != lock_path(c));
  fs::remove_all(locks);
}

TEST_CASE("data paths") {
  CHECK(fs::exists(resolve_data_path("maass_even_r13.78.txt")));
  CHECK(fs::exists(resolve_data_path("bessel_kir.txt")));
  CHECK_THROWS_AS(resolve_data_path("no_such_file.txt"), ConfigError);
}
