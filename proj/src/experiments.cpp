#include "orbitlab/experiments.hpp"

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "orbitlab/bessel.hpp"
#include "orbitlab/contraction.hpp"
#include "orbitlab/fit.hpp"
#include "orbitlab/frobenius.hpp"
#include "orbitlab/latticelab.hpp"
#include "orbitlab/orbits.hpp"
#include "orbitlab/quantize.hpp"

#ifndef ORBITLAB_DATA_DIR
#define ORBITLAB_DATA_DIR "data"
#endif
#ifndef ORBITLAB_LOCK_DIR
#define ORBITLAB_LOCK_DIR "locks"
#endif
#ifndef ORBITLAB_VERSION
#define ORBITLAB_VERSION "0.0.0"
#endif

namespace orbitlab {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- checks

json Check::to_json() const {
  json j = {{"criterion", criterion}, {"name", name},        {"value", value},
            {"relation", relation},   {"threshold", threshold}, {"pass", pass}};
  if (!note.empty()) j["note"] = note;
  return j;
}

Check make_check(const std::string& criterion, const std::string& name, double value, const std::string& relation,
                 double threshold, const std::string& note) {
  Check c{criterion, name, value, relation, threshold, false, note};
  if (relation == "<=")
    c.pass = value <= threshold;
  else if (relation == "<")
    c.pass = value < threshold;
  else if (relation == ">=")
    c.pass = value >= threshold;
  else if (relation == ">")
    c.pass = value > threshold;
  else
    throw ParameterError("unknown check relation " + relation);
  // NaN never passes
  if (!std::isfinite(value)) c.pass = false;
  return c;
}

bool ExperimentResult::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

json version_info() {
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION;
  return {{"orbitlab", ORBITLAB_VERSION}, {"eigen", eigen.str()}, {"fftw", std::string(fftw_version)}};
}

json ExperimentResult::report() const {
  json checks_j = json::array();
  for (const Check& c : checks) checks_j.push_back(c.to_json());
  json locked_j = json::array();
  for (const LockedValue& v : locked)
    locked_j.push_back({{"name", v.name}, {"value", v.value}, {"rel_tol", v.rel_tol}, {"abs_tol", v.abs_tol}});
  return {{"experiment", experiment}, {"config", config}, {"versions", version_info()}, {"data", data},
          {"checks", checks_j},       {"locked", locked_j}, {"pass", pass()}};
}

namespace {

// ---------------------------------------------------------------- helpers

ParamSpec real_p(const std::string& key, double def, double lo, double hi, const std::string& help) {
  return {key, ParamType::Real, def, lo, hi, 0, {}, help};
}
ParamSpec int_p(const std::string& key, long def, double lo, double hi, const std::string& help) {
  return {key, ParamType::Integer, def, lo, hi, 0, {}, help};
}
ParamSpec grid_p(const std::string& key, std::vector<double> def, double lo, double hi, const std::string& help) {
  return {key, ParamType::Grid, def, lo, hi, 0, {}, help};
}
ParamSpec int_grid_p(const std::string& key, std::vector<long> def, double lo, double hi, const std::string& help) {
  return {key, ParamType::IntGrid, def, lo, hi, 0, {}, help};
}
ParamSpec vec_p(const std::string& key, std::vector<double> def, const std::string& help) {
  const int n = static_cast<int>(def.size());
  return {key, ParamType::Vector, def, 0, 0, n, {}, help};
}
ParamSpec text_p(const std::string& key, const std::string& def, std::vector<std::string> choices,
                 const std::string& help) {
  return {key, ParamType::Text, def, 0, 0, 0, std::move(choices), help};
}
ParamSpec path_p(const std::string& key, const std::string& def, const std::string& help) {
  return {key, ParamType::Path, def, 0, 0, 0, {}, help};
}

std::vector<double> to_vec(const Vec3& v) { return {v(0), v(1), v(2)}; }
Vec3 vec3(const ExperimentConfig& c, const std::string& key) {
  const std::vector<double> v = c.vec(key);
  return Vec3(v[0], v[1], v[2]);
}
std::vector<double> to_vec(const GroupMatrix& g) { return {g(0, 0), g(0, 1), g(1, 0), g(1, 1)}; }

QuantScheme scheme_for(const ExperimentConfig& c, double h) {
  QuantScheme s;
  s.hbar = h;
  s.threads = c.threads();
  return s;
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << "\n";
    os_ << std::setprecision(17);
  }
  void row(const std::vector<double>& v) {
    if (v.size() != cols_) throw ParameterError("csv row of the wrong width");
    for (std::size_t i = 0; i < v.size(); ++i) os_ << (i ? "," : "") << v[i];
    os_ << "\n";
  }
  std::string str() const { return os_.str(); }

 private:
  std::size_t cols_;
  std::ostringstream os_;
};

ExperimentResult start(const ExperimentConfig& c) {
  ExperimentResult r;
  r.experiment = c.name;
  r.config = c.to_json();
  return r;
}

void fit_into(ExperimentResult& r, const std::string& key, const std::vector<double>& h,
              const std::vector<double>& v) {
  r.data[key] = fit_exponent(h, v).to_json();
}

void require_nilpotent(const Vec3& v, const std::string& key) {
  if (!(v.norm() > 0.0)) throw ConfigError("config key '" + key + "': the zero covector is not regular");
  if (distance_to_nilcone(v) > 1e-9 * v.norm())
    throw ConfigError("config key '" + key + "': point is not on the nilcone");
}

void require_sorted_desc(const std::vector<double>& g, const std::string& key) {
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] < g[i - 1])) throw ConfigError("config key '" + key + "': grid must be strictly decreasing");
}

void require_sorted_asc(const std::vector<double>& g, const std::string& key) {
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) throw ConfigError("config key '" + key + "': grid must be strictly increasing");
}

void require_points(const std::vector<double>& g, std::size_t n, const std::string& key) {
  if (g.size() < n) throw ConfigError("config key '" + key + "': needs at least " + std::to_string(n) + " points");
}

// ---------------------------------------------------------------- small balls

std::vector<ParamSpec> small_ball_params(double delta, const Vec3& xi0) {
  return {real_p("symbol.delta", delta, 0.0, 0.49, "shrink rate of the ball"),
          vec_p("symbol.xi0", to_vec(xi0), "ball center on the nilcone (orthonormal coordinates)"),
          text_p("symbol.profile", "gauss", {"gauss", "plateau"}, "radial profile"),
          real_p("symbol.sigma", 1.0, 0.05, 5.0, "Gauss width in units of hbar^delta")};
}

BumpProfile profile_of(const ExperimentConfig& c) {
  BumpProfile p;
  p.kind = c.text("symbol.profile") == "plateau" ? BumpProfile::Kind::Plateau : BumpProfile::Kind::Gauss;
  p.sigma = c.real("symbol.sigma");
  return p;
}

Symbol small_ball_of(const ExperimentConfig& c, double h) {
  return make_small_ball(h, Covector::from_ortho(vec3(c, "symbol.xi0")), c.real("symbol.delta"), profile_of(c));
}

// Interior block over |xi3| <= |c3| + 1.5 w hbar^delta; the interior-mass check
// of the assembly guards the choice.
// With g given, also cover the transported ball around Ad*(g) xi0.
int small_ball_K(const ExperimentConfig& c, double h, const GroupMatrix* g = nullptr) {
  const double w = c.text("symbol.profile") == "plateau" ? 1.0 : c.real("symbol.sigma");
  const Vec3 xi0 = vec3(c, "symbol.xi0");
  const double radius = 1.5 * w * std::pow(h, c.real("symbol.delta"));
  double extent = std::abs(xi0(2)) + radius;
  if (g) {
    const double moved = apply_coadjoint(*g, Covector::from_ortho(xi0)).ortho()(2);
    extent = std::max(extent, std::abs(moved) + radius * norms(*g).coad);
  }
  const int K = PrincipalSeries::covering_K_max(h, extent);
  c.check_K(K, "small ball at hbar = " + std::to_string(h));
  return K;
}

void validate_small_ball(const ExperimentConfig& c) {
  require_nilpotent(vec3(c, "symbol.xi0"), "symbol.xi0");
  const auto g = c.grid("grid.hbar");
  require_sorted_desc(g, "grid.hbar");
  require_points(g, 3, "grid.hbar");
}

// ---------------------------------------------------------------- A1

ExperimentResult run_trace_kirillov(const ExperimentConfig& c) {
  ExperimentResult res = start(c);
  const double r = c.real("experiment.r");
  const Symbol a = make_gaussian(vec3(c, "symbol.center"), c.real("symbol.sigma"));
  const std::vector<double> grid = c.grid("grid.hbar");
  Csv csv({"hbar", "K_max", "hbar_trace", "orbit_integral", "rel_error", "tail_change"});
  std::vector<double> err;
  json rows = json::array();
  for (double h : grid) {
    const int K = PrincipalSeries::default_K_max(h);
    c.check_K(2 * K, "trace at hbar = " + std::to_string(h));
    const PrincipalSeries pi(r, K);
    QuantScheme s = scheme_for(c, h);
    s.interior_columns_only = true;
    const TraceResult t = trace_extrapolated(a, pi, s);
    const double tr = h * t.extrapolated.real();  // hbar^d tr, d = 1
    const double I = orbit_integral(a, scale_orbit(orbit_of_principal_series(r), h));
    const double e = std::abs(tr - I) / std::abs(I);
    err.push_back(e);
    rows.push_back({{"hbar", h}, {"K_max", K}, {"hbar_trace", tr}, {"orbit_integral", I}, {"rel_error", e},
                    {"tail_change", t.tail_change}});
    csv.row({h, double(K), tr, I, e, t.tail_change});
  }
  res.data["rows"] = rows;
  const PowerFit f = fit_exponent(grid, err);
  res.data["fit"] = f.to_json();
  res.checks.push_back(make_check("A1", "relative trace error exponent", f.slope, ">=", 0.8));
  res.tables["trace.csv"] = csv.str();
  return res;
}

// ---------------------------------------------------------------- A2

ExperimentResult run_calibrate(const ExperimentConfig& c) {
  ExperimentResult res = start(c);
  const double r = c.real("experiment.r");
  Csv csv({"K_max", "defect", "diagonal_defect"});
  json rows = json::array();
  std::vector<double> d;
  for (long K : c.int_grid("grid.K")) {
    const PrincipalSeries pi(r, static_cast<int>(K));
    const CalibrationReport cal = calibrate_delta(pi, scheme_for(c, 1.0));
    d.push_back(cal.defect);
    rows.push_back(cal.to_json());
    csv.row({double(K), cal.defect, cal.diagonal_defect});
  }
  res.data["rows"] = rows;
  res.checks.push_back(make_check("A2", "Frobenius defect at the first K_max", d[0], "<=", 0.05));
  for (std::size_t i = 1; i < d.size(); ++i)
    res.checks.push_back(make_check("A2", "defect ratio under K_max doubling (step " + std::to_string(i) + ")",
                                    d[i] / d[i - 1], "<=", 0.5));
  res.tables["calibration.csv"] = csv.str();
  return res;
}

// ---------------------------------------------------------------- A3 A4 A5

ExperimentResult run_defect(const ExperimentConfig& c, const std::string& which) {
  ExperimentResult res = start(c);
  const std::vector<double> grid = c.grid("grid.hbar");
  const double r = c.real("experiment.r");
  Csv csv({"hbar", "K_max", "defect", "scale", "relative"});
  json rows = json::array();
  std::vector<double> rel;
  GroupMatrix g;
  if (which == "equivariance") g = matrix_param(c.vec("experiment.g"), "experiment.g");
  for (double h : grid) {
    const Symbol a = small_ball_of(c, h);
    const PrincipalSeries pi(r, small_ball_K(c, h, which == "equivariance" ? &g : nullptr));
    const QuantScheme s = scheme_for(c, h);
    const DefectReport d = which == "compose" ? compose_defect(a, a, pi, s) : equivariance_defect(g, a, pi, s);
    rel.push_back(d.relative());
    json row = d.to_json();
    row["hbar"] = h;
    row["K_max"] = pi.K_max();
    rows.push_back(row);
    csv.row({h, double(pi.K_max()), d.defect, d.scale, d.relative()});
  }
  res.data["rows"] = rows;
  const PowerFit f = fit_exponent(grid, rel);
  res.data["fit"] = f.to_json();
  if (which == "compose") {
    res.data["theory_exponent"] = 1.0 - 2.0 * c.real("symbol.delta");
    res.checks.push_back(make_check("A3", "composition defect exponent", f.slope, ">=", 0.5));
  } else {
    res.checks.push_back(make_check("A4", "equivariance defect exponent", f.slope, ">=", 2.0));
  }
  res.tables[which + ".csv"] = csv.str();
  return res;
}

// Negative part of the floor relative to ||Op(a)||, clamped at round-off.
constexpr double kFloorClamp = 1e-14;

ExperimentResult run_positivity(const ExperimentConfig& c) {
  ExperimentResult res = start(c);
  const std::vector<double> grid = c.grid("grid.hbar");
  const double r = c.real("experiment.r");
  Csv csv({"hbar", "K_max", "floor", "opnorm", "hermiticity", "negative_part"});
  json rows = json::array();
  std::vector<double> neg;
  for (double h : grid) {
    const Symbol a = small_ball_of(c, h);
    const PrincipalSeries pi(r, small_ball_K(c, h));
    const PositivityReport p = positivity_floor(a, pi, scheme_for(c, h));
    const double n = std::max(-p.floor / p.opnorm, kFloorClamp);
    neg.push_back(n);
    json row = p.to_json();
    row["hbar"] = h;
    row["K_max"] = pi.K_max();
    row["negative_part"] = n;
    rows.push_back(row);
    csv.row({h, double(pi.K_max()), p.floor, p.opnorm, p.hermiticity, n});
  }
  res.data["rows"] = rows;
  res.data["clamp"] = kFloorClamp;
  const PowerFit f = fit_exponent(grid, neg);
  res.data["fit"] = f.to_json();
  res.checks.push_back(make_check("A5", "positivity floor exponent", f.slope, ">=", 0.5));
  res.tables["positivity.csv"] = csv.str();
  return res;
}

// ---------------------------------------------------------------- A6 A7

void validate_sobolev(const ExperimentConfig& c) {
  if (!(c.real("experiment.s") > kHalfOrbitDim))
    throw ConfigError("config key 'experiment.s': trace class needs s > " + std::to_string(kHalfOrbitDim));
  require_sorted_desc(c.grid("grid.hbar"), "grid.hbar");
}

ExperimentResult run_prop_A(const ExperimentConfig& c) {
  ExperimentResult res = start(c);
  const double s = c.real("experiment.s"), kappa = c.real("experiment.kappa"), r = c.real("experiment.r");
  Csv csv({"hbar", "K_max", "cond", "norm", "inv_norm", "minus_identity"});
  json rows = json::array();
  double worst = 0.0;
  for (double h : c.grid("grid.hbar")) {
    const int K = PrincipalSeries::default_K_max(h);
    c.check_K(K, "A(h) at hbar = " + std::to_string(h));
    const AReport a = A_of_h(s, kappa, PrincipalSeries(r, K), scheme_for(c, h));
    worst = std::max(worst, a.cond);
    json row = a.to_json();
    row["hbar"] = h;
    row["K_max"] = K;
    rows.push_back(row);
    csv.row({h, double(K), a.cond, a.norm, a.inv_norm, a.minus_identity});
  }
  res.data["rows"] = rows;
  res.checks.push_back(make_check("A6", "largest cond A(hbar)", worst, "<", 3.0));
  res.tables["prop_A.csv"] = csv.str();
  return res;
}

ExperimentResult run_prop_trace(const ExperimentConfig& c) {
  ExperimentResult res = start(c);
  const std::vector<double> grid = c.grid("grid.hbar");
  QuantScheme base;
  base.threads = c.threads();
  for (double h : grid) c.check_K(2 * PrincipalSeries::default_K_max(h), "trace at hbar = " + std::to_string(h));
  const UniformTraceReport u =
      uniform_trace_bound(c.real("experiment.s"), c.real("experiment.kappa"), c.real("experiment.r"), grid, base);
  res.data["report"] = u.to_json();
  Csv csv({"hbar", "trace", "raw"});
  for (std::size_t i = 0; i < u.hbar_grid.size(); ++i) csv.row({u.hbar_grid[i], u.values[i], u.raw[i]});
  res.checks.push_back(make_check("A7", "trace max/min over the grid", u.ratio, "<", 2.0));
  res.tables["prop_trace.csv"] = csv.str();
  return res;
}

// ---------------------------------------------------------------- A8

ExperimentResult run_sigma_scan(const ExperimentConfig& c) {
  ExperimentResult res = start(c);
  Csv csv({"delta", "theta", "kappa", "eps", "sigma_fit", "sigma_closed"});
  json rows = json::array();
  for (double delta : c.grid("grid.delta")) {
    const SigmaOptimum o = optimize_sigma(delta, c.real("experiment.xi0_norm"));
    rows.push_back(o.to_json());
    csv.row({delta, o.params.theta, o.params.kappa, o.params.eps, o.sigma_fit, o.sigma_closed});
    std::ostringstream tag;
    tag << "delta = " << delta;
    res.checks.push_back(make_check("A8", "sigma (fit) at " + tag.str(), o.sigma_fit, ">", 0.02));
    res.checks.push_back(make_check("A8", "sigma (closed form) at " + tag.str(), o.sigma_closed, ">", 0.02));
    res.checks.push_back(
        make_check("A8", "|fit - closed| at " + tag.str(), std::abs(o.sigma_fit - o.sigma_closed), "<=", 0.02));
  }
  res.data["rows"] = rows;
  res.tables["sigma.csv"] = csv.str();
  return res;
}

// ---------------------------------------------------------------- functionals

struct LoadedFunctional {
  FunctionalModel I;
  double r = 0.0;
};

LoadedFunctional maass_functional(const ExperimentConfig& c, ExperimentResult* res) {
  const MaassFormData d = load_maass_data(resolve_data_path(c.text("experiment.data")));
  const int K = static_cast<int>(c.integer("experiment.functional_K"));
  c.check_K(K, "Maass functional");
  MaassFunctionalInfo info;
  FunctionalModel I = functional_from_maass(d, PrincipalSeries(d.r, 64), K, &info);
  if (res) {
    res->data["maass"] = d.to_json();
    res->data["functional_info"] = info.to_json();
    res->data["evidence"] = I.evidence(d.r, I.declared_s()).to_json();
  }
  return {std::move(I), d.r};
}

LoadedFunctional functional_of(const ExperimentConfig& c, ExperimentResult* res) {
  if (c.text("experiment.functional") == "maass") return maass_functional(c, res);
  const int K = static_cast<int>(c.integer("experiment.functional_K"));
  c.check_K(K, "synthetic functional");
  return {synthetic_functional(c.real("experiment.s_star"), c.seed(), K), c.real("experiment.r")};
}

std::vector<ParamSpec> maass_params(long K) {
  return {path_p("experiment.data", "maass_even_r13.78.txt", "Maass coefficient file"),
          int_p("experiment.functional_K", K, 16, 720, "K-types of the functional")};
}

void validate_functional_K(const ExperimentConfig& c) {
  const long K = c.integer("experiment.functional_K");
  if (K % 4 != 0) throw ConfigError("config key 'experiment.functional_K': must be a multiple of 4");
  resolve_data_path(c.text("experiment.data"));
}

// ---------------------------------------------------------------- A9

ExperimentResult run_smallball(const ExperimentConfig& c) {
  ExperimentResult res = start(c);
  const LoadedFunctional F = functional_of(c, &res);
  SmallBallSpec spec;
  spec.xi0 = Covector::from_ortho(vec3(c, "symbol.xi0"));
  spec.delta = c.real("symbol.delta");
  spec.profile = profile_of(c);
  ContractionParams p;
  p.delta = spec.delta;
  p.kappa = c.real("experiment.kappa");
  p.theta = c.real("experiment.theta");
  p.eps = c.real("experiment.eps");
  ChainOptions opt;
  opt.enforce = false;
  QuantScheme base;
  base.threads = c.threads();
  const std::vector<double> grid = c.grid("grid.hbar");
  const BoundChainReport rep = bound_chain(spec, F.I, p, F.r, base, grid, opt);
  res.data["chain"] = rep.to_json();
  Csv csv({"hbar", "K_max", "Eh", "sqrt_link", "sup_uncontracted", "sup_contracted", "star", "star_ratio",
           "center_error", "radius_ratio", "tail"});
  for (const ChainRow& row : rep.rows)
    csv.row({row.hbar, double(row.K_max), row.Eh, row.sqrt_link, row.sup_uncontracted, row.sup_contracted, row.star,
             row.star_ratio, row.center_error, row.radius_ratio, row.tail});
  res.tables["chain.csv"] = csv.str();
  if (F.I.kind() == FunctionalModel::Kind::Maass) {
    // exploratory: the automorphic link is not evaluated over the whole space
    res.data["note"] = "automorphic functional: report only";
    for (const ChainRow& row : rep.rows) {
      std::ostringstream n;
      n << "Eh at hbar = " << row.hbar;
      res.locked.push_back({n.str(), row.Eh, 1e-6, 0.0});
    }
    return res;
  }
  const double d = kHalfOrbitDim;
  res.checks.push_back(make_check("A9", "largest contracted / star ratio", rep.max_star_ratio, "<=", 3.0));
  res.checks.push_back(make_check("A9", "E_hbar exponent (lower 2-sigma end)", rep.Eh_fit.lower(), ">=", -d + 0.05,
                                  "uncontracted baseline slope " + std::to_string(rep.uncontracted_fit.slope)));
  double center = 0.0, sqrt_link = 0.0, rad_lo = 1e300, rad_hi = 0.0, C = 0.0;
  for (const ChainRow& row : rep.rows) {
    center = std::max(center, row.center_error);
    sqrt_link = std::max(sqrt_link, row.sqrt_link);
    rad_lo = std::min(rad_lo, row.radius_ratio);
    rad_hi = std::max(rad_hi, row.radius_ratio);
    C = std::max({C, row.contraction.C2, row.contraction.C3});
  }
  res.checks.push_back(make_check("A9", "contraction constants", C, "<=", 10.0));
  res.checks.push_back(make_check("A9", "square-root link", sqrt_link, "<=", opt.sqrt_tol));
  res.checks.push_back(make_check("A9", "contracted center error", center, "<=", opt.center_tol));
  res.checks.push_back(make_check("A9", "contracted radius ratio (low)", rad_lo, ">=", opt.radius_lo));
  res.checks.push_back(make_check("A9", "contracted radius ratio (high)", rad_hi, "<=", opt.radius_hi));
  return res;
}

void validate_smallball(const ExperimentConfig& c) {
  validate_small_ball(c);
  ContractionParams p;
  p.delta = c.real("symbol.delta");
  p.kappa = c.real("experiment.kappa");
  p.theta = c.real("experiment.theta");
  p.eps = c.real("experiment.eps");
  p.validate();
  if (c.text("experiment.functional") == "maass") resolve_data_path(c.text("experiment.data"));
  if (c.integer("experiment.functional_K") % 4 != 0)
    throw ConfigError("config key 'experiment.functional_K': must be a multiple of 4");
  if (c.text("experiment.functional") == "maass" && c.integer("experiment.functional_K") > 720)
    throw ConfigError("config key 'experiment.functional_K': the Maass data resolve |k| <= 720");
}

// ---------------------------------------------------------------- A10 A11

struct BesselRef {
  double r, x, value;
};

std::vector<BesselRef> load_bessel_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read Bessel table " + path);
  std::vector<BesselRef> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    BesselRef b{};
    if (!(is >> b.r >> b.x >> b.value)) throw ParseError(path + ":" + std::to_string(n) + ": expected r x value");
    out.push_back(b);
  }
  return out;
}

ExperimentResult run_frobenius_validate(const ExperimentConfig& c) {
  ExperimentResult res = start(c);
  const MaassFormData d = load_maass_data(resolve_data_path(c.text("experiment.data")));
  res.data["maass"] = d.to_json();
  res.checks.push_back(make_check("A11", "Hecke residual", d.hecke_residual, "<", 1e-5));
  res.checks.push_back(make_check("A11", "automorphy residual", d.automorphy_residual, "<", 1e-5));

  const std::vector<BesselRef> table = load_bessel_table(resolve_data_path(c.text("experiment.bessel_table")));
  double worst = 0.0;
  Csv bt({"r", "x", "reference", "computed", "rel_error"});
  for (const BesselRef& b : table) {
    const double v = bessel_K_imag_order(b.r, b.x, true);
    const double e = std::abs(v - b.value) / std::max(std::abs(b.value), 1e-250);
    worst = std::max(worst, e);
    bt.row({b.r, b.x, b.value, v, e});
  }
  res.tables["bessel.csv"] = bt.str();
  res.data["bessel_points"] = table.size();
  res.data["bessel_worst"] = worst;
  res.checks.push_back(make_check("A11", "Bessel points in the oracle table", double(table.size()), ">=", 50.0));
  res.checks.push_back(make_check("A11", "Bessel relative error vs oracle", worst, "<", 1e-8));
  double ode = 0.0;
  for (double x : c.grid("grid.ode_x")) ode = std::max(ode, bessel_ode_residual(d.r, x));
  res.data["ode_residual"] = ode;
  res.checks.push_back(make_check("A11", "Bessel ODE residual (relative to scale)", ode, "<", 1e-6));

  const int K = static_cast<int>(c.integer("experiment.functional_K"));
  c.check_K(K, "Maass functional");
  MaassFunctionalInfo info;
  const FunctionalModel I = functional_from_maass(d, PrincipalSeries(d.r, 64), K, &info);
  res.data["functional_info"] = info.to_json();
  const SobolevEvidence ev = I.evidence(d.r, c.real("experiment.evidence_s"));
  res.data["evidence"] = ev.to_json();
  res.checks.push_back(make_check("", "iota oracle error |k| <= 4", info.worst_oracle, "<=", 1e-4));
  res.checks.push_back(make_check("", "Sobolev evidence change K/2 -> K", ev.change, "<", 0.01));

  QuantScheme base;
  base.threads = c.threads();
  const SobolevNormReport sn =
      functional_sobolev_norm(I, c.real("experiment.s"), c.real("experiment.kappa"), d.r, c.grid("grid.hbar"), base);
  res.data["sobolev_norm"] = sn.to_json();
  Csv sc({"hbar", "K_max", "value", "tail"});
  for (const SobolevNormRow& row : sn.rows) sc.row({row.hbar, double(row.K_max), row.value, row.tail});
  res.tables["sobolev_norm.csv"] = sc.str();
  res.checks.push_back(make_check("A10", "functional Sobolev norm max/min", sn.ratio, "<", 2.0));
  return res;
}

// ---------------------------------------------------------------- A12 and E_hbar on small balls

ExperimentResult run_eh_dyadic(const ExperimentConfig& c) {
  ExperimentResult res = start(c);
  const LoadedFunctional F = maass_functional(c, &res);
  const Symbol a = k_average(make_gaussian(vec3(c, "symbol.center"), c.real("symbol.sigma")));
  QuantScheme base;
  base.threads = c.threads();
  const std::vector<double> grid = c.grid("grid.hbar");
  for (double h : grid) {
    const int K = orbit_covering_K(a, h, F.r);
    c.check_K(K, "dyadic symbol at hbar = " + std::to_string(h));
    if (K > F.I.K_max())
      throw TruncationError("dyadic symbol at hbar = " + std::to_string(h) + " needs K_max = " + std::to_string(K) +
                            " beyond the functional");
  }
  const DyadicReport rep = dyadic_bound_report(a, F.I, F.r, grid, base);
  res.data["report"] = rep.to_json();
  Csv csv({"hbar", "K_max", "Eh", "orbit_integral", "ratio", "truncation_change"});
  for (const DyadicRow& row : rep.rows) {
    csv.row({row.hbar, double(row.K_max), row.Eh, row.orbit_integral, row.ratio, row.truncation_change});
    std::ostringstream n;
    n << "ratio at hbar = " << row.hbar;
    res.locked.push_back({n.str(), row.ratio, 1e-6, 0.0});
  }
  res.locked.push_back({"C (largest ratio)", rep.max_ratio, 1e-6, 0.0});
  res.tables["dyadic.csv"] = csv.str();
  res.checks.push_back(make_check("A12", "smallest ratio", rep.min_ratio, ">", 0.0));
  res.checks.push_back(make_check("A12", "ratio max/min over the grid", rep.max_ratio / rep.min_ratio, "<", 4.0));
  double trunc = 0.0;
  for (const DyadicRow& row : rep.rows) trunc = std::max(trunc, row.truncation_change);
  res.checks.push_back(make_check("", "K-type truncation change", trunc, "<", 0.02));
  return res;
}

ExperimentResult run_eh_smallball(const ExperimentConfig& c) {
  ExperimentResult res = start(c);
  const LoadedFunctional F = functional_of(c, &res);
  const std::vector<double> grid = c.grid("grid.hbar");
  Csv csv({"hbar", "K_max", "Eh", "orbit_integral", "ratio", "truncation_change"});
  json rows = json::array();
  std::vector<double> E;
  for (double h : grid) {
    const Symbol a = small_ball_of(c, h);
    const int K = orbit_covering_K(a, h, F.r);
    c.check_K(K, "small ball at hbar = " + std::to_string(h));
    if (K > F.I.K_max())
      throw TruncationError("small ball at hbar = " + std::to_string(h) + " needs K_max = " + std::to_string(K) +
                            " beyond the functional");
    const PrincipalSeries pi(F.r, K);
    EhOptions opt;
    opt.symmetric = false;
    opt.doubling = EhOptions::Doubling::Symbolic;
    const EhReport e = eval_Eh(a, F.I, pi, scheme_for(c, h), opt);
    const double I = orbit_integral(a, scale_orbit(orbit_of_principal_series(F.r), h));
    const double ratio = e.value / (I / h);
    E.push_back(e.value);
    json row = e.to_json();
    row["orbit_integral"] = I;
    row["ratio"] = ratio;
    rows.push_back(row);
    csv.row({h, double(K), e.value, I, ratio, e.truncation_change});
    std::ostringstream n;
    n << "Eh at hbar = " << h;
    res.locked.push_back({n.str(), e.value, 1e-6, 0.0});
  }
  res.data["rows"] = rows;
  if (std::all_of(E.begin(), E.end(), [](double v) { return v > 0.0; }))
    fit_into(res, "Eh_fit", grid, E);
  else
    res.data["Eh_fit"] = nullptr;
  res.data["note"] = "report only";
  res.tables["eh_smallball.csv"] = csv.str();
  return res;
}

// ---------------------------------------------------------------- A13

ExperimentResult run_packing(const ExperimentConfig& c) {
  ExperimentResult res = start(c);
  PsiSpec psi;
  psi.center = matrix_param(c.vec("experiment.center"), "experiment.center");
  psi.radius = c.real("experiment.radius");
  psi.amplitude = c.real("experiment.amplitude");
  const int n = static_cast<int>(c.integer("experiment.n"));
  const PackingReport main = packing_constant(psi, n);
  PsiSpec scaled = psi;
  scaled.amplitude *= 3.0;
  const PackingReport tripled = packing_constant(scaled, n);
  // a bump on a ball that no other translate meets
  const PsiSpec sep{GroupMatrix::identity(), 0.3, 1.0};
  const PackingReport separated = packing_constant(sep, n);
  res.data["main"] = main.to_json();
  res.data["tripled"] = tripled.to_json();
  res.data["separated"] = separated.to_json();
  Csv csv({"case", "value", "coarse", "change", "max_terms"});
  csv.row({0, main.value, main.coarse, main.change, double(main.max_terms)});
  csv.row({1, tripled.value, tripled.coarse, tripled.change, double(tripled.max_terms)});
  csv.row({2, separated.value, separated.coarse, separated.change, double(separated.max_terms)});
  res.tables["packing.csv"] = csv.str();
  res.checks.push_back(make_check("A13", "packing constant finite and positive", main.value, ">", 0.0));
  res.checks.push_back(make_check("A13", "|C(3 psi) / C(psi) - 3|", std::abs(tripled.value / main.value - 3.0),
                                  "<=", 1e-12));
  res.checks.push_back(make_check("A13", "separated bump |C - 1|", std::abs(separated.value - 1.0), "<=", 1e-12));
  res.locked.push_back({"C(psi)", main.value, 1e-9, 0.0});
  return res;
}

void validate_lattice_g(const ExperimentConfig& c) { matrix_param(c.vec("experiment.g"), "experiment.g"); }

ExperimentResult run_tube_count(const ExperimentConfig& c) {
  ExperimentResult res = start(c);
  TubeSpec spec;
  spec.rho = c.real("experiment.rho");
  spec.g = matrix_param(c.vec("experiment.g"), "experiment.g");
  Csv csv({"T", "pm_min", "pm_max", "mod_center_min", "mod_center_max", "ambiguous", "tested"});
  json rows = json::array();
  std::vector<double> Ts, counts;
  for (double T : c.grid("grid.T")) {
    spec.T = T;
    const TubeCount t = tube_count(spec);
    json row = t.to_json();
    row["T"] = T;
    rows.push_back(row);
    csv.row({T, double(t.pm_min), double(t.pm_max), double(t.mod_center_min), double(t.mod_center_max),
             double(t.ambiguous), double(t.tested)});
    std::ostringstream n;
    n << "count at T = " << T;
    res.locked.push_back({n.str() + " (min)", double(t.mod_center_min), 0.0, 0.0});
    res.locked.push_back({n.str() + " (max)", double(t.mod_center_max), 0.0, 0.0});
    if (t.mod_center_min > 0) {
      Ts.push_back(T);
      counts.push_back(double(t.mod_center_min));
    }
  }
  res.data["rows"] = rows;
  if (Ts.size() >= 3)
    fit_into(res, "growth_fit", Ts, counts);
  else
    res.data["growth_fit"] = nullptr;
  res.tables["tubes.csv"] = csv.str();
  return res;
}

// worst |a / b - 1| over the interval ends
double worst_ratio_gap(double a_lo, double a_hi, double b_lo, double b_hi) {
  double w = 0.0;
  for (double a : {a_lo, a_hi})
    for (double b : {b_lo, b_hi}) w = std::max(w, std::abs(a / b - 1.0));
  return w;
}

ExperimentResult run_ratner(const ExperimentConfig& c) {
  ExperimentResult res = start(c);
  const double rho = c.real("experiment.rho"), rho2 = c.real("experiment.rho_small");
  const GroupMatrix g = matrix_param(c.vec("experiment.g"), "experiment.g");
  const std::vector<double> grid = c.grid("grid.T");
  const TubeSpec defaults;
  const CountReport rep = ratner_ratio(defaults.xi0, rho, g, grid);
  const CountReport small = ratner_ratio(defaults.xi0, rho2, g, {grid.back()});
  res.data["report"] = rep.to_json();
  res.data["small_ball"] = small.to_json();
  res.tables["ratner.csv"] = rep.csv();
  res.tables["ratner_small.csv"] = small.csv();
  for (const ReturnRow& row : rep.rows) {
    std::ostringstream n;
    n << "ratio at T = " << row.T;
    res.locked.push_back({n.str(), row.ratio_min, 1e-9, 0.0});
  }
  const ReturnRow& last = rep.rows.back();
  const ReturnRow& prev = rep.rows[rep.rows.size() - 2];
  res.checks.push_back(make_check("A13", "ratio change between the last two T",
                                  worst_ratio_gap(last.ratio_min, last.ratio_max, prev.ratio_min, prev.ratio_max),
                                  "<=", 0.25));
  // C_T scales with vol(B): compare the normalized ratios at the two radii
  const ReturnRow& s = small.rows.back();
  res.checks.push_back(make_check("A13", "volume scaling of C_T (rho vs rho_small)",
                                  worst_ratio_gap(last.ratio_min, last.ratio_max, s.ratio_min, s.ratio_max), "<=",
                                  0.15));
  return res;
}

void validate_ratner(const ExperimentConfig& c) {
  validate_lattice_g(c);
  const auto g = c.grid("grid.T");
  require_sorted_asc(g, "grid.T");
  require_points(g, 2, "grid.T");
  if (!(c.real("experiment.rho_small") < c.real("experiment.rho")))
    throw ConfigError("config key 'experiment.rho_small': must be below experiment.rho");
}

// ---------------------------------------------------------------- registry

std::vector<ExperimentDef> build_registry() {
  std::vector<ExperimentDef> reg;
  const Vec3 nil = nilpotent_regular_point().ortho();
  const std::vector<double> h4{0.2, 0.1, 0.05, 0.025}, h3{0.2, 0.1, 0.05};
  const GroupMatrix g4 = GroupMatrix::diag(1.3) * GroupMatrix::rotation(0.4);
  const auto hgrid = [](std::vector<double> def) { return grid_p("grid.hbar", def, 1e-4, 1.0, "hbar grid"); };

  reg.push_back({"trace-kirillov",
                 "hbar tr Op(a) against the orbit integral",
                 {real_p("experiment.r", 1.0, 0.0, 50.0, "principal series parameter"),
                  vec_p("symbol.center", {kSqrt2, 0.0, 0.0}, "Gaussian center"),
                  real_p("symbol.sigma", 0.35, 0.05, 5.0, "Gaussian width"), hgrid(h4)},
                 [](const ExperimentConfig& c) {
                   require_sorted_desc(c.grid("grid.hbar"), "grid.hbar");
                   require_points(c.grid("grid.hbar"), 3, "grid.hbar");
                 },
                 run_trace_kirillov});
  reg.push_back({"calibrate-delta",
                 "Op_1(1 + |xi|^2) against the Laplacian",
                 {real_p("experiment.r", 1.0, 0.0, 50.0, "principal series parameter"),
                  int_grid_p("grid.K", {64, 128}, 16, 4096, "K_max values")},
                 [](const ExperimentConfig& c) {
                   const auto Ks = c.int_grid("grid.K");
                   for (long K : Ks) {
                     if (K % 4 != 0) throw ConfigError("config key 'grid.K': K_max must be a multiple of 4");
                     c.check_K(static_cast<int>(K), "calibration");
                   }
                   for (std::size_t i = 1; i < Ks.size(); ++i)
                     if (Ks[i] <= Ks[i - 1]) throw ConfigError("config key 'grid.K': must be increasing");
                 },
                 run_calibrate});
  {
    auto p = small_ball_params(0.2, nil);
    p.push_back(real_p("experiment.r", 1.0, 0.0, 50.0, "principal series parameter"));
    p.push_back(hgrid(h4));
    reg.push_back({"compose", "Op(a) Op(a) - Op(a^2) for small balls", p, validate_small_ball,
                   [](const ExperimentConfig& c) { return run_defect(c, "compose"); }});
  }
  {
    auto p = small_ball_params(0.2, nil);
    p.push_back(real_p("experiment.r", 1.0, 0.0, 50.0, "principal series parameter"));
    p.push_back(vec_p("experiment.g", to_vec(g4), "group element a, b, c, d"));
    p.push_back(hgrid(h3));
    reg.push_back({"equivariance", "Op(g.a) against pi(g) Op(a) pi(g)^-1", p,
                   [](const ExperimentConfig& c) {
                     validate_small_ball(c);
                     validate_lattice_g(c);
                   },
                   [](const ExperimentConfig& c) { return run_defect(c, "equivariance"); }});
  }
  {
    auto p = small_ball_params(0.2, nil);
    p.push_back(real_p("experiment.r", 1.0, 0.0, 50.0, "principal series parameter"));
    p.push_back(hgrid(h4));
    reg.push_back({"positivity", "lowest eigenvalue of Op(a) for small balls", p, validate_small_ball,
                   run_positivity});
  }
  const auto sob = [&](std::vector<double> grid) {
    return std::vector<ParamSpec>{real_p("experiment.s", 1.5, 0.0, 10.0, "Sobolev order"),
                                  real_p("experiment.kappa", 0.7, 0.0, 1.0, "kappa, r = hbar^-kappa"),
                                  real_p("experiment.r", 1.0, 0.0, 50.0, "principal series parameter"),
                                  hgrid(grid)};
  };
  reg.push_back({"prop-A", "conditioning of A(hbar) = Op(b) Op(a)", sob(h3), validate_sobolev, run_prop_A});
  reg.push_back({"prop-trace", "uniform trace of Op(a^{s,kappa})", sob(h3), validate_sobolev, run_prop_trace});
  reg.push_back({"sigma-scan",
                 "optimal sigma of the star bound",
                 {grid_p("grid.delta", {0.1, 0.2, 0.3, 0.4}, 1e-3, 0.49, "delta values"),
                  real_p("experiment.xi0_norm", 1.0, 1e-3, 1e3, "|xi0|")},
                 nullptr, run_sigma_scan});
  {
    const SmallBallSpec sb;
    auto p = small_ball_params(0.3, sb.xi0.ortho());
    for (ParamSpec q : maass_params(640)) {
      if (q.key == "experiment.functional_K") {
        q.def = 4096;
        q.hi = 65536;
      }
      p.push_back(q);
    }
    p.push_back(text_p("experiment.functional", "synthetic", {"synthetic", "maass"}, "functional"));
    p.push_back(real_p("experiment.s_star", 1.5, 0.0, 10.0, "synthetic functional order"));
    p.push_back(int_p("experiment.seed", 11, 0, 4294967295.0, "synthetic phases"));
    p.push_back(real_p("experiment.r", 1.0, 0.0, 50.0, "principal series parameter (synthetic)"));
    p.push_back(real_p("experiment.kappa", 0.7, 0.0, 1.0, "kappa"));
    p.push_back(real_p("experiment.theta", 0.29, 0.0, 1.0, "contraction exponent"));
    p.push_back(real_p("experiment.eps", 0.01, 0.0, 1.0, "epsilon, s = d + eps"));
    p.push_back(hgrid(h4));
    reg.push_back({"smallball", "contraction chain for small-ball symbols", p, validate_smallball, run_smallball});
  }
  {
    auto p = maass_params(640);
    p.push_back(path_p("experiment.bessel_table", "bessel_kir.txt", "Bessel oracle table"));
    p.push_back(real_p("experiment.evidence_s", 1.1, 0.0, 10.0, "order of the Sobolev evidence"));
    p.push_back(real_p("experiment.s", 1.5, 0.0, 10.0, "Sobolev order of the norm"));
    p.push_back(real_p("experiment.kappa", 0.7, 0.0, 1.0, "kappa"));
    p.push_back(grid_p("grid.ode_x", {1.0, 3.0, 8.0, 12.0, 20.0}, 1e-3, 700.0, "ODE sample points"));
    p.push_back(hgrid(h3));
    reg.push_back({"frobenius-validate", "Maass data, Bessel oracle and the functional Sobolev norm", p,
                   [](const ExperimentConfig& c) {
                     validate_functional_K(c);
                     resolve_data_path(c.text("experiment.bessel_table"));
                     validate_sobolev(c);
                   },
                   run_frobenius_validate});
  }
  {
    auto p = maass_params(640);
    p.push_back(vec_p("symbol.center", {1.6, 0.0, 1.5}, "Gaussian center before K-averaging"));
    p.push_back(real_p("symbol.sigma", 0.4, 0.05, 5.0, "Gaussian width"));
    p.push_back(hgrid({0.1, 0.05, 0.025}));
    reg.push_back({"eh-dyadic", "E_hbar of a fixed ring symbol against the orbit integral", p,
                   [](const ExperimentConfig& c) {
                     validate_functional_K(c);
                     require_sorted_desc(c.grid("grid.hbar"), "grid.hbar");
                   },
                   run_eh_dyadic});
  }
  {
    const SmallBallSpec sb;
    auto p = small_ball_params(0.3, sb.xi0.ortho());
    for (const ParamSpec& q : maass_params(640)) p.push_back(q);
    p.push_back(text_p("experiment.functional", "maass", {"synthetic", "maass"}, "functional"));
    p.push_back(real_p("experiment.s_star", 1.5, 0.0, 10.0, "synthetic functional order"));
    p.push_back(real_p("experiment.r", 1.0, 0.0, 50.0, "principal series parameter (synthetic)"));
    p.push_back(hgrid({0.1, 0.05, 0.025}));
    reg.push_back({"eh-smallball", "E_hbar of small-ball symbols (report only)", p,
                   [](const ExperimentConfig& c) {
                     validate_small_ball(c);
                     validate_functional_K(c);
                   },
                   run_eh_smallball});
  }
  reg.push_back({"packing",
                 "packing constant of a bump on SL(2,R)",
                 {vec_p("experiment.center", {1.0, 0.0, 0.0, 1.0}, "bump center a, b, c, d"),
                  real_p("experiment.radius", 0.3, 1e-3, 3.0, "bump radius"),
                  real_p("experiment.amplitude", 1.0, 1e-6, 1e6, "bump amplitude"),
                  int_p("experiment.n", 12, 4, 64, "coarse grid points per axis")},
                 [](const ExperimentConfig& c) {
                   matrix_param(c.vec("experiment.center"), "experiment.center");
                   PsiSpec psi{matrix_param(c.vec("experiment.center"), "experiment.center"),
                               c.real("experiment.radius"), 1.0};
                   if (psi.norm_extent() > 10.0)
                     throw ConfigError("config key 'experiment.radius': support reaches beyond norm 10");
                 },
                 run_packing});
  reg.push_back({"tube-count",
                 "lattice points in the tube B S g^-1 B",
                 {real_p("experiment.rho", 0.1, 1e-3, 0.5, "ball radius"),
                  vec_p("experiment.g", to_vec(generic_base_point()), "base point a, b, c, d"),
                  grid_p("grid.T", {5.0, 10.0, 20.0, 40.0}, 1.0 + 1e-9, kLatticeTMax, "norm bounds")},
                 [](const ExperimentConfig& c) {
                   validate_lattice_g(c);
                   require_sorted_asc(c.grid("grid.T"), "grid.T");
                 },
                 run_tube_count});
  reg.push_back({"ratner-ratio",
                 "horocycle returns against vol(S_T) vol(B) / vol(X)",
                 {real_p("experiment.rho", 0.3, 1e-3, 0.5, "ball radius"),
                  real_p("experiment.rho_small", 0.15, 1e-3, 0.5, "second radius for the volume scaling"),
                  vec_p("experiment.g", to_vec(generic_base_point()), "base point a, b, c, d"),
                  grid_p("grid.T", {250.0, 500.0, 1000.0, 2000.0}, 2.0, kLatticeTMax, "norm bounds")},
                 validate_ratner, run_ratner});
  return reg;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ParameterError("cannot write " + p.string());
  out << text;
  if (!out) throw ParameterError("write failed for " + p.string());
}

std::string fmt_num(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

const std::vector<ExperimentDef>& experiment_registry() {
  static const std::vector<ExperimentDef> reg = build_registry();
  return reg;
}

const ExperimentDef& find_experiment(const std::string& name) {
  for (const ExperimentDef& d : experiment_registry())
    if (d.name == name) return d;
  throw ConfigError("unknown experiment '" + name + "'");
}

ExperimentConfig make_config(const std::string& name, const RawConfig& raw) {
  const ExperimentDef& def = find_experiment(name);
  ExperimentConfig cfg = resolve_config(raw, name, def.params);
  if (def.validate) {
    try {
      def.validate(cfg);
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("invalid parameters for ") + name + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) { return find_experiment(cfg.name).run(cfg); }

std::string resolve_data_path(const std::string& path) {
  if (fs::exists(path)) return path;
  const fs::path in_data = fs::path(ORBITLAB_DATA_DIR) / path;
  if (fs::exists(in_data)) return in_data.string();
  throw ConfigError("data file '" + path + "' not found (also looked in " + std::string(ORBITLAB_DATA_DIR) + ")");
}

std::string LockOutcome::status_name() const {
  switch (status) {
    case Status::None: return "none";
    case Status::Created: return "created";
    case Status::Matched: return "matched";
    case Status::Refreshed: return "refreshed";
    case Status::Mismatch: return "mismatch";
  }
  return "?";
}

std::string lock_path(const ExperimentConfig& cfg) {
  std::string dir = cfg.text("experiment.lock_dir");
  if (dir.empty()) {
    const char* env = std::getenv("ORBITLAB_LOCK_DIR");
    dir = env && *env ? env : ORBITLAB_LOCK_DIR;
  }
  return (fs::path(dir) / (cfg.name + "-" + cfg.hash() + ".json")).string();
}

LockOutcome apply_lock(const ExperimentResult& res, const ExperimentConfig& cfg, bool refresh) {
  LockOutcome out;
  if (res.locked.empty()) return out;
  out.path = lock_path(cfg);
  json constants = json::array();
  for (const LockedValue& v : res.locked)
    constants.push_back({{"name", v.name}, {"value", v.value}, {"rel_tol", v.rel_tol}, {"abs_tol", v.abs_tol}});
  const bool exists = fs::exists(out.path);
  if (!exists || refresh) {
    const json lock = {{"experiment", cfg.name},
                       {"config_hash", cfg.hash()},
                       {"config", cfg.result_params()},
                       {"created", utc_now()},
                       {"constants", constants}};
    fs::create_directories(fs::path(out.path).parent_path());
    write_file(out.path, lock.dump(2) + "\n");
    out.status = exists ? LockOutcome::Status::Refreshed : LockOutcome::Status::Created;
    return out;
  }
  std::ifstream in(out.path);
  json lock;
  try {
    lock = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("lock file " + out.path + ": " + e.what());
  }
  out.status = LockOutcome::Status::Matched;
  std::ostringstream head;
  head << std::left << std::setw(32) << "constant" << std::setw(22) << "locked" << std::setw(22) << "current"
       << "status";
  out.lines.push_back(head.str());
  std::vector<std::string> seen;
  for (const json& entry : lock.at("constants")) {
    const std::string name = entry.at("name");
    const double locked = entry.at("value");
    const double rel = entry.at("rel_tol"), abs = entry.at("abs_tol");
    seen.push_back(name);
    const auto it = std::find_if(res.locked.begin(), res.locked.end(), [&](const LockedValue& v) { return v.name == name; });
    std::ostringstream line;
    line << std::left << std::setw(32) << name << std::setw(22) << fmt_num(locked);
    if (it == res.locked.end()) {
      line << std::setw(22) << "-" << "MISSING";
      out.status = LockOutcome::Status::Mismatch;
    } else {
      const bool ok = std::abs(it->value - locked) <= std::max(abs, rel * std::abs(locked));
      line << std::setw(22) << fmt_num(it->value) << (ok ? "ok" : "MISMATCH");
      if (!ok) out.status = LockOutcome::Status::Mismatch;
    }
    out.lines.push_back(line.str());
  }
  for (const LockedValue& v : res.locked)
    if (std::find(seen.begin(), seen.end(), v.name) == seen.end()) {
      std::ostringstream line;
      line << std::left << std::setw(32) << v.name << std::setw(22) << "-" << std::setw(22) << fmt_num(v.value)
           << "NEW";
      out.lines.push_back(line.str());
      out.status = LockOutcome::Status::Mismatch;
    }
  return out;
}

void write_outputs(const ExperimentResult& res, const LockOutcome& lock, const std::string& dir) {
  fs::create_directories(dir);
  write_file(fs::path(dir) / "report.json", res.report().dump(2) + "\n");
  for (const auto& [name, text] : res.tables) write_file(fs::path(dir) / name, text);
  if (lock.status != LockOutcome::Status::None) {
    json j = {{"status", lock.status_name()}, {"path", lock.path}, {"table", lock.lines}};
    write_file(fs::path(dir) / "lock.json", j.dump(2) + "\n");
  }
}

int exit_status(const ExperimentResult& res, const LockOutcome& lock) {
  if (lock.status == LockOutcome::Status::Mismatch) return 2;
  return res.pass() ? 0 : 1;
}

}  // namespace orbitlab
