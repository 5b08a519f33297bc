#include "orbitlab/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace orbitlab {

namespace {

const std::set<std::string> kSections = {"experiment", "symbol", "grid"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string where(const RawConfig::Entry* e, const std::string& origin) {
  if (!e) return "default";
  return origin + ":" + std::to_string(e->line);
}

double parse_real(const std::string& s, const std::string& key) {
  const std::string t = trim(s);
  if (t.empty()) throw ConfigError("config key '" + key + "': empty number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigError("config key '" + key + "': '" + t + "' is not a finite number");
  return v;
}

long parse_int(const std::string& s, const std::string& key) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
    throw ConfigError("config key '" + key + "': '" + t + "' is not an integer");
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) out.push_back(trim(item));
  if (!s.empty() && s.back() == ',') out.push_back("");
  return out;
}

void check_range(double v, const ParamSpec& p) {
  if (v < p.lo || v > p.hi) {
    std::ostringstream os;
    os << "config key '" << p.key << "': " << v << " outside [" << p.lo << ", " << p.hi << "]";
    throw ConfigError(os.str());
  }
}

nlohmann::json convert(const std::string& value, const ParamSpec& p) {
  switch (p.type) {
    case ParamType::Real: {
      const double v = parse_real(value, p.key);
      check_range(v, p);
      return v;
    }
    case ParamType::Integer: {
      const long v = parse_int(value, p.key);
      check_range(static_cast<double>(v), p);
      return v;
    }
    case ParamType::Grid:
    case ParamType::Vector: {
      std::vector<double> out;
      for (const std::string& item : split_list(value)) {
        const double v = parse_real(item, p.key);
        if (p.type == ParamType::Grid) check_range(v, p);
        out.push_back(v);
      }
      if (out.empty()) throw ConfigError("config key '" + p.key + "': empty list");
      if (p.type == ParamType::Vector && static_cast<int>(out.size()) != p.length)
        throw ConfigError("config key '" + p.key + "': expected " + std::to_string(p.length) + " entries, got " +
                          std::to_string(out.size()));
      return out;
    }
    case ParamType::IntGrid: {
      std::vector<long> out;
      for (const std::string& item : split_list(value)) {
        const long v = parse_int(item, p.key);
        check_range(static_cast<double>(v), p);
        out.push_back(v);
      }
      if (out.empty()) throw ConfigError("config key '" + p.key + "': empty list");
      return out;
    }
    case ParamType::Path:
      if (value.empty()) throw ConfigError("config key '" + p.key + "': empty path");
      return value;
    case ParamType::Text:
      if (!p.choices.empty() && std::find(p.choices.begin(), p.choices.end(), value) == p.choices.end()) {
        std::string all;
        for (const auto& c : p.choices) all += (all.empty() ? "" : ", ") + c;
        throw ConfigError("config key '" + p.key + "': '" + value + "' is not one of " + all);
      }
      return value;
    case ParamType::Flag:
      if (value == "true" || value == "yes" || value == "1") return true;
      if (value == "false" || value == "no" || value == "0") return false;
      throw ConfigError("config key '" + p.key + "': '" + value + "' is not a flag (true/false)");
  }
  throw ConfigError("config key '" + p.key + "': unsupported type");
}

const nlohmann::json& lookup(const nlohmann::json& params, const std::string& key) {
  const auto it = params.find(key);
  if (it == params.end()) throw ConfigError("config key '" + key + "' is not defined for this experiment");
  return *it;
}

}  // namespace

const RawConfig::Entry* RawConfig::find(const std::string& key) const {
  for (const Entry& e : entries)
    if (e.key == key) return &e;
  return nullptr;
}

RawConfig parse_config_text(const std::string& text, const std::string& origin) {
  RawConfig raw;
  raw.origin = origin;
  std::istringstream is(text);
  std::string line, section;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string at = origin + ":" + std::to_string(n);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at + ": malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!kSections.count(section))
        throw ConfigError(at + ": unknown section [" + section + "] (allowed: experiment, symbol, grid)");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(at + ": expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(at + ": missing key");
    if (section.empty()) throw ConfigError(at + ": key '" + key + "' outside a section");
    if (key.find_first_of(" \t[]") != std::string::npos) throw ConfigError(at + ": malformed key '" + key + "'");
    const std::string full = section + "." + key;
    if (raw.find(full)) throw ConfigError(at + ": config key '" + full + "' given twice");
    raw.entries.push_back({full, value, n});
  }
  return raw;
}

RawConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config_text(os.str(), path);
}

double default_memory_mb() {
  if (const char* v = std::getenv("ORBITLAB_CACHE_MB")) {
    char* end = nullptr;
    const double mb = std::strtod(v, &end);
    if (end == v || *end != '\0' || !(mb > 0.0)) throw ConfigError("ORBITLAB_CACHE_MB must be a positive number");
    return mb;
  }
  return 4096.0;
}

std::vector<ParamSpec> common_params() {
  std::vector<ParamSpec> p;
  p.push_back({"experiment.name", ParamType::Text, "", 0, 0, 0, {}, "experiment name (optional, must match)"});
  p.push_back({"experiment.seed", ParamType::Integer, 7, 0, 4294967295.0, 0, {}, "random seed"});
  p.push_back({"experiment.out", ParamType::Path, "results", 0, 0, 0, {}, "output directory"});
  p.push_back({"experiment.threads", ParamType::Integer, 1, 1, 256, 0, {}, "assembly threads"});
  p.push_back({"experiment.max_K", ParamType::Integer, 4096, 16, 65536, 0, {}, "largest K_max allowed"});
  p.push_back({"experiment.max_memory_mb", ParamType::Real, default_memory_mb(), 16, 1e7, 0, {},
               "memory cap for dense operator blocks"});
  p.push_back({"experiment.lock_dir", ParamType::Path, "", 0, 0, 0, {}, "regression lock directory"});
  return p;
}

ExperimentConfig resolve_config(const RawConfig& raw, const std::string& name, const std::vector<ParamSpec>& schema) {
  // an experiment may override a common default
  std::vector<ParamSpec> all = common_params();
  for (const ParamSpec& p : schema) {
    const auto it = std::find_if(all.begin(), all.end(), [&](const ParamSpec& q) { return q.key == p.key; });
    if (it != all.end())
      *it = p;
    else
      all.push_back(p);
  }
  for (const RawConfig::Entry& e : raw.entries) {
    const bool known = std::any_of(all.begin(), all.end(), [&](const ParamSpec& p) { return p.key == e.key; });
    if (!known)
      throw ConfigError(raw.origin + ":" + std::to_string(e.line) + ": unknown config key '" + e.key +
                        "' for experiment " + name);
  }
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.origin = raw.origin.empty() ? "<defaults>" : raw.origin;
  for (const ParamSpec& p : all) {
    const RawConfig::Entry* e = raw.find(p.key);
    if (!e) {
      cfg.params[p.key] = p.def;
      continue;
    }
    try {
      cfg.params[p.key] = convert(e->value, p);
    } catch (const ConfigError& err) {
      throw ConfigError(where(e, raw.origin) + ": " + err.what());
    }
  }
  const std::string given = cfg.text("experiment.name");
  if (!given.empty() && given != name)
    throw ConfigError("config key 'experiment.name': file is for '" + given + "', running '" + name + "'");
  cfg.params["experiment.name"] = name;
  return cfg;
}

double ExperimentConfig::real(const std::string& key) const {
  const nlohmann::json& v = lookup(params, key);
  if (!v.is_number()) throw ConfigError("config key '" + key + "' is not a number");
  return v.get<double>();
}

long ExperimentConfig::integer(const std::string& key) const {
  const nlohmann::json& v = lookup(params, key);
  if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' is not an integer");
  return v.get<long>();
}

std::vector<double> ExperimentConfig::grid(const std::string& key) const {
  const nlohmann::json& v = lookup(params, key);
  if (!v.is_array() || v.empty()) throw ConfigError("config key '" + key + "' is not a nonempty list");
  return v.get<std::vector<double>>();
}

std::vector<long> ExperimentConfig::int_grid(const std::string& key) const {
  const nlohmann::json& v = lookup(params, key);
  if (!v.is_array() || v.empty()) throw ConfigError("config key '" + key + "' is not a nonempty list");
  return v.get<std::vector<long>>();
}

std::vector<double> ExperimentConfig::vec(const std::string& key) const { return grid(key); }

std::string ExperimentConfig::text(const std::string& key) const {
  const nlohmann::json& v = lookup(params, key);
  if (!v.is_string()) throw ConfigError("config key '" + key + "' is not text");
  return v.get<std::string>();
}

bool ExperimentConfig::flag(const std::string& key) const {
  const nlohmann::json& v = lookup(params, key);
  if (!v.is_boolean()) throw ConfigError("config key '" + key + "' is not a flag");
  return v.get<bool>();
}

void ExperimentConfig::check_K(int K, const std::string& what) const {
  if (K > max_K())
    throw ConfigError(what + " needs K_max = " + std::to_string(K) + ", above experiment.max_K = " +
                      std::to_string(max_K()));
  // a few dense complex blocks of side K + 1
  const double mb = 4.0 * 16.0 * (K + 1.0) * (K + 1.0) / (1024.0 * 1024.0);
  if (mb > real("experiment.max_memory_mb")) {
    std::ostringstream os;
    os << what << " needs about " << mb << " MB at K_max = " << K << ", above experiment.max_memory_mb";
    throw ConfigError(os.str());
  }
}

nlohmann::json ExperimentConfig::result_params() const {
  nlohmann::json p = params;
  p.erase("experiment.out");
  p.erase("experiment.threads");
  p.erase("experiment.lock_dir");
  p.erase("experiment.max_memory_mb");
  return p;
}

std::string ExperimentConfig::hash() const {
  const std::string s = result_params().dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json ExperimentConfig::to_json() const { return {{"name", name}, {"params", params}, {"hash", hash()}}; }

GroupMatrix matrix_param(const std::vector<double>& v, const std::string& key) {
  if (v.size() != 4) throw ConfigError("config key '" + key + "': a matrix needs four entries a, b, c, d");
  const double det = v[0] * v[3] - v[1] * v[2];
  if (std::abs(det - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "config key '" << key << "': determinant " << det << " is not 1";
    throw ConfigError(os.str());
  }
  // renormalise the rounding of decimal input
  const double s = 1.0 / std::sqrt(det);
  return GroupMatrix(v[0] * s, v[1] * s, v[2] * s, v[3] * s);
}

}  // namespace orbitlab
