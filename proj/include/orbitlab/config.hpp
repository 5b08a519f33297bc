#pragma once

// Experiment configuration files.
//
//   # comment
//   [experiment]
//   name = trace-kirillov
//   seed = 7
//   [symbol]
//   sigma = 0.35
//   center = 1.4142135623730951, 0, 0
//   [grid]
//   hbar = 0.2, 0.1, 0.05, 0.025
//
// One `key = value` per line, sections [experiment], [symbol] and [grid]
// only, no nesting. Keys are addressed as section.key; lists are comma
// separated. A key may appear once. Everything is checked against the
// schema of the named experiment: unknown keys, wrong types and values out
// of range are errors that name the key and the line.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbitlab/error.hpp"
#include "orbitlab/lie_sl2.hpp"

namespace orbitlab {

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error("config", w) {}
};

struct RawConfig {
  struct Entry {
    std::string key;  // section.key
    std::string value;
    int line = 0;
  };
  std::vector<Entry> entries;
  std::string origin;
  const Entry* find(const std::string& key) const;
};

RawConfig parse_config_text(const std::string& text, const std::string& origin = "<text>");
RawConfig load_config_file(const std::string& path);

enum class ParamType {
  Real,
  Integer,
  Grid,     // nonempty list of reals
  IntGrid,  // nonempty list of integers
  Vector,   // fixed-length list of reals (`length`)
  Path,
  Text,
  Flag
};

struct ParamSpec {
  std::string key;  // section.key
  ParamType type = ParamType::Real;
  nlohmann::json def;  // already typed
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  int length = 0;                   // Vector only
  std::vector<std::string> choices;  // Text only, empty = free
  std::string help;
};

// Keys every experiment accepts.
std::vector<ParamSpec> common_params();

struct ExperimentConfig {
  std::string name;
  nlohmann::json params = nlohmann::json::object();  // resolved: defaults overlaid by the file
  std::string origin;

  double real(const std::string& key) const;
  long integer(const std::string& key) const;
  std::vector<double> grid(const std::string& key) const;
  std::vector<long> int_grid(const std::string& key) const;
  std::vector<double> vec(const std::string& key) const;
  std::string text(const std::string& key) const;
  bool flag(const std::string& key) const;

  std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("experiment.seed")); }
  int threads() const { return static_cast<int>(integer("experiment.threads")); }
  int max_K() const { return static_cast<int>(integer("experiment.max_K")); }
  std::string out_dir() const { return text("experiment.out"); }

  // Throws ConfigError naming the cap when K exceeds experiment.max_K or the
  // matrices of that size would not fit into experiment.max_memory_mb.
  void check_K(int K, const std::string& what) const;

  // Parameters that change results; out dir and thread count excluded.
  nlohmann::json result_params() const;
  // FNV-1a of result_params() as 16 hex digits.
  std::string hash() const;
  nlohmann::json to_json() const;
};

// Overlays `raw` on the schema defaults. `name` must match experiment.name
// when the file sets it. Throws ConfigError.
ExperimentConfig resolve_config(const RawConfig& raw, const std::string& name, const std::vector<ParamSpec>& schema);

// 2x2 matrix from four entries a, b, c, d (row major); det must be 1.
GroupMatrix matrix_param(const std::vector<double>& v, const std::string& key);

// Default memory cap in MB: ORBITLAB_CACHE_MB when set, else 4096.
double default_memory_mb();

}  // namespace orbitlab
