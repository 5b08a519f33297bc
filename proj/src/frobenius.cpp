#include "orbitlab/frobenius.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "orbitlab/bessel.hpp"
#include "orbitlab/error.hpp"
#include "orbitlab/orbits.hpp"

namespace orbitlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
const cplx kI(0.0, 1.0);

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- functional

nlohmann::json SobolevEvidence::to_json() const {
  return {{"s", s}, {"norm_half", norm_half}, {"norm_full", norm_full}, {"change", change}, {"stable", stable}};
}

FunctionalModel::FunctionalModel(CVector coeffs, int K_max, Kind kind, std::string provenance, double declared_s)
    : coeffs_(std::move(coeffs)), K_max_(K_max), kind_(kind), provenance_(std::move(provenance)),
      declared_s_(declared_s) {
  if (K_max_ < 0 || K_max_ % 2 != 0) throw ParameterError("functional K_max must be even and >= 0");
  if (coeffs_.size() != K_max_ + 1) throw ParameterError("functional needs K_max + 1 coefficients");
}

cplx FunctionalModel::iota(int k) const {
  if (k % 2 != 0 || std::abs(k) > K_max_) return 0.0;
  return coeffs_((k + K_max_) / 2);
}

KTypeVector FunctionalModel::vector_for(const PrincipalSeries& pi) const {
  KTypeVector v;
  v.K_max = pi.K_max();
  v.coeffs = CVector::Zero(pi.dim());
  for (int k = -pi.K_max(); k <= pi.K_max(); k += 2) v.coeffs(pi.index_of(k)) = std::conj(iota(k));
  return v;
}

cplx FunctionalModel::apply(const KTypeVector& v) const {
  cplx s = 0.0;
  for (int i = 0; i < v.coeffs.size(); ++i) s += v.coeffs(i) * iota(2 * i - v.K_max);
  return s;
}

double FunctionalModel::dual_norm_sq(double r, double s, int K) const {
  double sum = 0.0;
  for (int k = -std::min(K, K_max_); k <= std::min(K, K_max_); k += 2)
    sum += std::norm(iota(k)) * std::pow(delta_eigenvalue(r, k), -s);
  return sum;
}

SobolevEvidence FunctionalModel::evidence(double r, double s) const {
  SobolevEvidence e;
  e.s = s;
  const int half = 2 * (K_max_ / 4);
  e.norm_half = dual_norm_sq(r, s, half);
  e.norm_full = dual_norm_sq(r, s, K_max_);
  e.change = e.norm_full > 0 ? std::abs(e.norm_full - e.norm_half) / e.norm_full : 0.0;
  e.stable = e.change < 0.01;
  return e;
}

nlohmann::json FunctionalModel::to_json() const {
  return {{"kind", kind_ == Kind::Synthetic ? "synthetic" : "maass"},
          {"provenance", provenance_},
          {"K_max", K_max_},
          {"declared_s", declared_s_},
          {"iota0", {iota(0).real(), iota(0).imag()}}};
}

FunctionalModel synthetic_functional(double s_star, std::uint64_t seed, int K_max, bool real) {
  if (!(s_star > 1.0)) throw ParameterError("synthetic functional needs s* > 1");
  if (K_max < 2 || K_max % 2 != 0) throw ParameterError("K_max must be even and >= 2");
  std::mt19937_64 gen(seed);
  auto phase = [&] { return 2.0 * kPi * static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  CVector c(K_max + 1);
  auto amp = [&](int k) { return std::pow(1.0 + double(k) * k, 0.5 * s_star - 0.75); };
  if (real) {
    c((K_max) / 2) = amp(0);
    for (int k = 2; k <= K_max; k += 2) {
      const cplx z = std::polar(amp(k), phase());
      c((k + K_max) / 2) = z;
      c((-k + K_max) / 2) = std::conj(z);
    }
  } else {
    for (int k = -K_max; k <= K_max; k += 2) c((k + K_max) / 2) = std::polar(amp(k), phase());
  }
  std::ostringstream prov;
  prov << "synthetic(s=" << s_star << ", seed=" << seed << (real ? ", real" : "") << ")";
  return FunctionalModel(std::move(c), K_max, FunctionalModel::Kind::Synthetic, prov.str(), s_star);
}

// ---------------------------------------------------------------- Maass data

nlohmann::json MaassFormData::to_json() const {
  return {{"r", r},
          {"parity", parity},
          {"N", N()},
          {"source", source},
          {"path", path},
          {"hecke_residual", hecke_residual},
          {"automorphy_residual", automorphy_residual}};
}

namespace {

double parse_number(const std::string& tok, int line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size() || errno == ERANGE || !std::isfinite(v))
    throw ParseError("line " + std::to_string(line) + ": bad number '" + tok + "'");
  return v;
}

}  // namespace

MaassFormData parse_maass_data(const std::string& text, const std::string& origin) {
  MaassFormData d;
  d.path = origin;
  bool have_r = false;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto first = raw.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (raw[first] == '#') {
      const std::string body = raw.substr(first + 1);
      const auto p = body.find("source:");
      if (p != std::string::npos) d.source.push_back(body.substr(body.find_first_not_of(" ", p + 7)));
      continue;
    }
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    const std::string where = origin + " line " + std::to_string(line);
    if (tok[0] == "r") {
      if (tok.size() != 2 || have_r) throw ParseError(where + ": malformed r line");
      d.r = parse_number(tok[1], line);
      have_r = true;
      continue;
    }
    if (tok[0] == "parity") {
      if (tok.size() != 2) throw ParseError(where + ": malformed parity line");
      if (tok[1] != "even") throw ParseError(where + ": only even forms are supported");
      d.parity = tok[1];
      continue;
    }
    if (tok.size() != 2) throw ParseError(where + ": expected '<n> <a_n>'");
    if (!have_r || d.parity.empty()) throw ParseError(where + ": coefficient before the r/parity header");
    char* end = nullptr;
    const long n = std::strtol(tok[0].c_str(), &end, 10);
    if (end != tok[0].c_str() + tok[0].size() || n < 1) throw ParseError(where + ": bad index '" + tok[0] + "'");
    if (n <= d.N()) throw ParseError(where + ": duplicate or descending index " + tok[0]);
    if (n != d.N() + 1) throw ParseError(where + ": missing index " + std::to_string(d.N() + 1));
    d.a.push_back(parse_number(tok[1], line));
  }
  if (!text.empty() && text.back() != '\n')
    throw ParseError(origin + " line " + std::to_string(line) + ": truncated (no end of line)");
  if (!have_r) throw ParseError(origin + ": no r line");
  if (d.parity.empty()) throw ParseError(origin + ": no parity line");
  if (d.a.empty()) throw ParseError(origin + ": no coefficients");
  if (!(d.r > 0.0)) throw ParseError(origin + ": r must be positive");
  if (d.a[0] != 1.0) throw ValidationError(origin + ": coefficients must be Hecke normalized (a_1 = 1)");

  std::pair<int, int> bad;
  d.hecke_residual = hecke_residual(d, 1e-5, &bad);
  if (d.hecke_residual > 1e-5)
    throw ValidationError(origin + ": Hecke relation fails at (m, n) = (" + std::to_string(bad.first) + ", " +
                          std::to_string(bad.second) + "), residual " + fmt(d.hecke_residual));
  d.automorphy_residual = automorphy_residual(d);
  if (d.automorphy_residual > 1e-5)
    throw ValidationError(origin + ": automorphy check fails, residual " + fmt(d.automorphy_residual));
  return d;
}

MaassFormData load_maass_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_maass_data(ss.str(), path);
}

double hecke_residual(const MaassFormData& d, double tol, std::pair<int, int>* first_bad) {
  double worst = 0.0;
  bool flagged = false;
  const int N = d.N();
  for (int m = 2; m <= N; ++m)
    for (int n = m; n * m <= N; ++n) {
      const int g = std::gcd(m, n);
      double rhs = 0.0;
      for (int e = 1; e <= g; ++e)
        if (g % e == 0) rhs += d.coeff(m * n / (e * e));
      const double res = std::abs(d.coeff(m) * d.coeff(n) - rhs);
      worst = std::max(worst, res);
      if (!flagged && res > tol && first_bad) {
        *first_bad = {m, n};
        flagged = true;
      }
    }
  return worst;
}

double maass_phi_scaled(const MaassFormData& d, cplx z) {
  const double x = z.real(), y = z.imag();
  if (!(y > 0.0)) throw DomainError("phi needs Im z > 0");
  double sum = 0.0;
  for (int n = 1; n <= d.N(); ++n) {
    const double arg = 2.0 * kPi * n * y;
    if (arg > 2.0 * kPi * y + 800.0) break;
    sum += d.coeff(n) * bessel_K_imag_order(d.r, arg, true) * std::cos(2.0 * kPi * n * x);
  }
  return 2.0 * std::sqrt(y) * sum;
}

double automorphy_residual(const MaassFormData& d) {
  double worst = 0.0, scale = 0.0;
  for (int j = 0; j < 20; ++j) {
    const double x = -0.475 + 0.05 * j;
    const double y = std::sqrt(1.0 - x * x) + 0.02 + 0.6 * ((j * 7) % 20) / 19.0;
    const cplx z(x, y);
    const double f = maass_phi_scaled(d, z);
    const double fs = maass_phi_scaled(d, -1.0 / z);
    const double ft = maass_phi_scaled(d, z + 1.0);
    scale = std::max(scale, std::abs(f));
    worst = std::max({worst, std::abs(fs - f), std::abs(ft - f)});
  }
  return scale > 0 ? worst / scale : worst;
}

// ---------------------------------------------------------------- iota_k

nlohmann::json MaassFunctionalInfo::to_json() const {
  return {{"oracle_error", oracle_error},
          {"worst_oracle", worst_oracle},
          {"tail_term", tail_term},
          {"miller_change", miller_change},
          {"parity_defect", parity_defect}};
}

namespace {

// Raising and lowering constants of pi: dpi(R) e_k = alpha_k e_{k+2},
// dpi(L) e_k = beta_k e_{k-2}, R, L = (H +- i(E+F)) / 2.
cplx alpha_of(double r, int k) { return cplx(0.5 + 0.5 * k, r); }
cplx beta_of(double r, int k) { return cplx(0.5 - 0.5 * k, r); }

// Values at y = 1 of the weight-k functions of one Fourier term e(nx), for
// k = 0, dir 2, ..., dir 2 steps. They obey
//   alpha_k f_{k+2} - beta_k f_{k-2} = (k - 4 pi n) f_k.
// Along the direction where k n > 0 the sequence is oscillatory or growing and
// is run forward from f_0 and f_{dir 2} (first-order raising / lowering). The
// other direction wants the minimal solution, found by backward recursion
// from a far start (Miller) and normalized by f_0. `miller_change` receives
// the largest absolute change when the start is moved twice as far.
// The true values are f[j] * exp(log_scale[j]); the forward run rescales to
// stay inside double range.
std::vector<cplx> weight_sequence(double r, double n, double w0, double dw0, int dir, int steps,
                                  double* miller_change, std::vector<double>& log_scale) {
  std::vector<cplx> f(steps + 1);
  log_scale.assign(steps + 1, 0.0);
  f[0] = w0;
  if (steps == 0) return f;
  auto coef = [&](int k) { return cplx(k - 4.0 * kPi * n); };
  if (dir * n > 0) {
    // R_0 f_0 = w' - 2 pi n w, L_0 f_0 = w' + 2 pi n w
    f[1] = dir > 0 ? (dw0 - 2.0 * kPi * n * w0) / alpha_of(r, 0) : (dw0 + 2.0 * kPi * n * w0) / beta_of(r, 0);
    // prev, cur share the running scale
    cplx prev = f[0], cur = f[1];
    double ls = 0.0;
    for (int j = 1; j < steps; ++j) {
      const int k = dir * 2 * j;
      const cplx next = dir > 0 ? (coef(k) * cur + beta_of(r, k) * prev) / alpha_of(r, k)
                                : (alpha_of(r, k) * prev - coef(k) * cur) / beta_of(r, k);
      prev = cur;
      cur = next;
      if (std::abs(cur) > 1e150) {
        prev *= 1e-150;
        cur *= 1e-150;
        ls += 150.0 * std::log(10.0);
      }
      f[j + 1] = cur;
      log_scale[j + 1] = ls;
    }
    return f;
  }
  auto miller = [&](int top) {
    std::vector<cplx> g(top + 2, 0.0);
    g[top] = 1.0;
    for (int j = top; j >= 1; --j) {
      const int k = dir * 2 * j;
      g[j - 1] = dir > 0 ? (alpha_of(r, k) * g[j + 1] - coef(k) * g[j]) / beta_of(r, k)
                         : (coef(k) * g[j] + beta_of(r, k) * g[j + 1]) / alpha_of(r, k);
      if (std::abs(g[j - 1]) > 1e200)
        for (int i = j - 1; i <= top; ++i) g[i] *= 1e-200;
    }
    const cplx s = w0 / g[0];
    std::vector<cplx> out(steps + 1);
    for (int j = 0; j <= steps; ++j) out[j] = g[j] * s;
    return out;
  };
  const int top = steps + 40 + static_cast<int>(8.0 * std::sqrt(steps + 1.0)) + static_cast<int>(4.0 * kPi * std::abs(n));
  f = miller(top);
  const std::vector<cplx> g = miller(2 * top);
  double ch = 0.0;
  for (int j = 0; j <= steps; ++j) ch = std::max(ch, std::abs(f[j] - g[j]));
  if (miller_change) *miller_change = std::max(*miller_change, ch);
  return g;
}

GroupMatrix exp_of(const AlgebraVector& x, double t) { return exp_map(x * t); }

cplx mobius(const GroupMatrix& g, cplx z) { return (g(0, 0) * z + g(0, 1)) / (g(1, 0) * z + g(1, 1)); }

}  // namespace

cplx maass_iota_by_differencing(const MaassFormData& d, const PrincipalSeries& pi, int k, double step) {
  if (k % 2 != 0 || std::abs(k) > 4) throw ParameterError("differencing oracle covers |k| <= 4");
  const double r = pi.r();
  const AlgebraVector H = kH, V = kE + kF;
  // F_j(g): the function of the weight-j vector, j from 0 toward k.
  std::function<cplx(const GroupMatrix&, int)> F = [&](const GroupMatrix& g, int j) -> cplx {
    if (j == 0) return maass_phi_scaled(d, mobius(g, cplx(0.0, 1.0)));
    const bool up = j > 0;
    const int prev = up ? j - 2 : j + 2;
    auto deriv = [&](const AlgebraVector& X) {
      auto f = [&](double t) { return F(g * exp_of(X, t), prev); };
      const double h = step;
      return (-f(2 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2 * h)) / (12.0 * h);
    };
    const cplx dH = deriv(H), dV = deriv(V);
    const cplx op = up ? 0.5 * (dH + kI * dV) : 0.5 * (dH - kI * dV);
    return op / (up ? alpha_of(r, prev) : beta_of(r, prev));
  };
  return F(GroupMatrix::identity(), k);
}

FunctionalModel functional_from_maass(const MaassFormData& d, const PrincipalSeries& pi, int K_max,
                                      MaassFunctionalInfo* info) {
  if (std::abs(pi.r() - d.r) > 1e-9) throw ParameterError("representation and Maass form have different r");
  if (K_max < 4 || K_max % 2 != 0) throw ParameterError("K_max must be even and >= 4");
  const double r = d.r;
  CVector c = CVector::Zero(K_max + 1);
  const int half = K_max / 2;
  // per k: largest |contribution| of the two top coefficients
  std::vector<double> top(K_max + 1, -std::numeric_limits<double>::infinity());  // log
  double miller_change = 0.0;
  for (int sgn : {1, -1})
    for (int m = 1; m <= d.N(); ++m) {
      const double n = sgn * m;
      const double x = 2.0 * kPi * m;
      double log_k = 0.0;
      const BesselValue b = bessel_K_imag_order_log_scaled(r, x, &log_k);
      log_k += 0.5 * kPi * r;  // phi carries e^{pi r / 2} K
      // w(y) = sqrt(y) K(2 pi m y) at y = 1, in units of e^{log_k}
      const double w0 = b.value, dw0 = 0.5 * b.value + x * b.derivative;
      for (int dir : {1, -1}) {
        double ch = 0.0;
        std::vector<double> ls;
        const std::vector<cplx> f = weight_sequence(r, n, w0, dw0, dir, half, &ch, ls);
        miller_change = std::max(miller_change, std::abs(d.coeff(m)) * ch * std::exp(log_k));
        for (int j = (dir > 0 ? 0 : 1); j <= half; ++j) {
          const int i = (dir * 2 * j + K_max) / 2;
          const cplx v = d.coeff(m) * f[j];
          c(i) += v * std::exp(log_k + ls[j]);
          if (m >= d.N() - 1 && std::abs(v) > 0.0)
            top[i] = std::max(top[i], std::log(std::abs(v)) + log_k + ls[j]);
        }
      }
    }
  double tail = 0.0, scale = 0.0;
  for (int i = 0; i <= K_max; ++i) scale = std::max(scale, std::abs(c(i)));
  for (int i = 0; i <= K_max; ++i) tail = std::max(tail, std::exp(top[i] - std::log(scale)));

  MaassFunctionalInfo inf;
  inf.tail_term = tail;
  inf.miller_change = miller_change / scale;
  if (inf.miller_change > 1e-10) throw NumericalError("backward recursion for iota_k did not settle");
  if (tail > 1e-8)
    throw TruncationError("Maass coefficients up to n = " + std::to_string(d.N()) + " do not resolve iota_k for |k| <= " +
                          std::to_string(K_max) + " (last terms " + fmt(tail) + ")");
  for (int k : {-4, -2, 2, 4}) {
    const cplx ref = maass_iota_by_differencing(d, pi, k);
    const cplx got = c((k + K_max) / 2);
    // iota_k vanishes for k = 2 mod 4 (z = i is fixed by S), hence the floor
    const double err = std::abs(ref - got) / std::max(std::abs(got), 1e-3 * scale);
    inf.oracle_error.push_back(err);
    inf.worst_oracle = std::max(inf.worst_oracle, err);
  }
  for (int k = 2; k <= K_max; k += 2)
    inf.parity_defect = std::max(inf.parity_defect, std::abs(c((k + K_max) / 2) - c((-k + K_max) / 2)) / scale);
  if (info) *info = inf;
  if (inf.worst_oracle > 1e-4)
    throw ValidationError("raising-operator values disagree with differencing of phi (" + fmt(inf.worst_oracle) +
                          ")");
  std::ostringstream prov;
  prov << "maass(r=" << d.r << ", N=" << d.N() << ", " << d.path << ")";
  return FunctionalModel(std::move(c), K_max, FunctionalModel::Kind::Maass, prov.str(), 1.1);
}

// ---------------------------------------------------------------- pairings

nlohmann::json EhReport::to_json() const {
  return {{"hbar", hbar},
          {"value", value},
          {"imag", imag},
          {"symmetric", symmetric},
          {"agreement", agreement},
          {"value_doubled", value_doubled},
          {"truncation_change", truncation_change},
          {"K_max", K_max},
          {"functional", functional}};
}

namespace {

CVector interior_vector(const KTypeVector& v, const PrincipalSeries& pi) {
  return v.coeffs.segment(pi.interior_begin(), pi.interior_dim());
}

// <Op(a) v_I, v_I> on the interior block.
cplx pairing_on(const Symbol& a, const FunctionalModel& I, const PrincipalSeries& pi, const QuantScheme& scheme) {
  QuantScheme sc = scheme;
  sc.interior_columns_only = true;
  const OperatorMatrix M = assemble_op(a, pi, sc);
  const CVector v = interior_vector(I.vector_for(pi), pi);
  return v.dot(M.interior() * v);
}

}  // namespace

EhReport eval_Eh(const Symbol& a, const FunctionalModel& I, const PrincipalSeries& pi, const QuantScheme& scheme,
                 const EhOptions& opt) {
  if (a.meta().support.kind == SupportDescriptor::Kind::Global)
    throw ParameterError("E_hbar needs a compactly supported (smoothing) symbol");
  EhReport rep;
  rep.hbar = scheme.hbar;
  rep.K_max = pi.K_max();
  rep.functional = I.provenance();
  const cplx E = pairing_on(a, I, pi, scheme);
  rep.value = E.real();
  rep.imag = E.imag();
  if (opt.symmetric && a.meta().real && a.meta().nonnegative) {
    QuantScheme sc = scheme;
    sc.interior_columns_only = false;
    const OperatorMatrix S = assemble_op(sqrt_symbol(a), pi, sc);
    const CVector v = interior_vector(I.vector_for(pi), pi);
    rep.symmetric = (S.entries.middleCols(pi.interior_begin(), pi.interior_dim()) * v).squaredNorm();
    rep.agreement = std::abs(rep.value - rep.symmetric) / std::max(std::abs(rep.value), 1e-300);
  }
  if (opt.doubling == EhOptions::Doubling::Symbolic) {
    const int Kin = pi.interior_K();
    if (2 * Kin > I.K_max())
      throw TruncationError("functional is known up to K = " + std::to_string(I.K_max()) + ", the tail bound needs " +
                            std::to_string(2 * Kin));
    double add = 0.0;
    for (int k = Kin + 2; k <= 2 * Kin; k += 2)
      add += std::norm(I.iota(k)) * ring_max(a, k, scheme.hbar, pi.r()) +
             std::norm(I.iota(-k)) * ring_max(a, -k, scheme.hbar, pi.r());
    rep.value_doubled = rep.value + add;
    rep.truncation_change = add / std::max(std::abs(rep.value), 1e-300);
    if (rep.truncation_change > opt.doubling_tol)
      throw TruncationError("K-types past K_max = " + std::to_string(pi.K_max()) + " can move E_hbar by " +
                            fmt(rep.truncation_change));
  } else if (opt.doubling == EhOptions::Doubling::Exact) {
    const cplx E2 = pairing_on(a, I, pi.with_K(2 * pi.K_max()), scheme);
    rep.value_doubled = E2.real();
    rep.truncation_change = std::abs(E2 - E) / std::max(std::abs(E2), 1e-300);
    if (rep.truncation_change > opt.doubling_tol)
      throw TruncationError("E_hbar moved by " + fmt(rep.truncation_change) + " when K_max doubled to " +
                            std::to_string(2 * pi.K_max()));
  }
  return rep;
}

nlohmann::json DyadicReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& r : rows)
    rows_j.push_back({{"hbar", r.hbar},
                      {"E", r.Eh},
                      {"orbit_integral", r.orbit_integral},
                      {"ratio", r.ratio},
                      {"truncation_change", r.truncation_change},
                      {"K_max", r.K_max}});
  return {{"rows", rows_j}, {"max_ratio", max_ratio}, {"min_ratio", min_ratio}, {"functional", functional}};
}

Vec3 orbit_point_at(int k, double phi, double hbar, double r) {
  const double x3 = hbar * k / kSqrt2;
  const double rho = std::sqrt(x3 * x3 + 2.0 * hbar * hbar * r * r);
  return Vec3(rho * std::cos(phi), rho * std::sin(phi), x3);
}

double ring_max(const Symbol& a, int k, double hbar, double r) {
  double m = 0.0;
  for (int j = 0; j < 64; ++j) m = std::max(m, std::abs(a.at(orbit_point_at(k, 2.0 * kPi * j / 64, hbar, r))));
  return m;
}

int orbit_covering_K(const Symbol& a, double hbar, double r, double tol) {
  const double ext = a.frequency_extent();
  if (!std::isfinite(ext)) throw ParameterError("covering K needs a bounded support");
  const int scan = 2 * static_cast<int>(std::ceil(kSqrt2 * ext / hbar / 2.0)) + 2;
  std::vector<double> vals;
  double peak = 0.0;
  for (int k = -scan; k <= scan; k += 2) {
    vals.push_back(ring_max(a, k, hbar, r));
    peak = std::max(peak, vals.back());
  }
  int top = 0;
  for (std::size_t i = 0; i < vals.size(); ++i)
    if (vals[i] > tol * peak) top = std::max(top, std::abs(-scan + 2 * static_cast<int>(i)));
  return std::max(64, (2 * (top + 8) + 3) / 4 * 4);
}

DyadicReport dyadic_bound_report(const Symbol& a, const FunctionalModel& I, double r,
                                 const std::vector<double>& hbar_grid, const QuantScheme& base) {
  if (hbar_grid.empty()) throw ParameterError("empty hbar grid");
  if (!(a.meta().real && a.meta().nonnegative)) throw ParameterError("dyadic bound needs a non-negative symbol");
  DyadicReport rep;
  rep.functional = I.provenance();
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (double h : hbar_grid) {
    QuantScheme sc = base;
    sc.hbar = h;
    const PrincipalSeries pi(r, orbit_covering_K(a, h, r));
    EhOptions opt;
    opt.symmetric = false;
    opt.doubling = EhOptions::Doubling::Symbolic;
    const EhReport e = eval_Eh(a, I, pi, sc, opt);
    DyadicRow row;
    row.hbar = h;
    row.Eh = e.value;
    row.K_max = pi.K_max();
    row.truncation_change = e.truncation_change;
    row.orbit_integral = orbit_integral(a, scale_orbit(orbit_of_principal_series(r), h));
    row.ratio = row.Eh / (row.orbit_integral / h);
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    rep.min_ratio = std::min(rep.min_ratio, row.ratio);
    rep.rows.push_back(row);
  }
  return rep;
}

nlohmann::json SobolevNormReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& r : rows) rows_j.push_back({{"hbar", r.hbar}, {"value", r.value}, {"tail", r.tail}, {"K_max", r.K_max}});
  return {{"rows", rows_j}, {"ratio", ratio}};
}

SobolevNormReport functional_sobolev_norm(const FunctionalModel& I, double s, double kappa, double r,
                                          const std::vector<double>& hbar_grid, const QuantScheme& base) {
  if (!(s > 1.0)) throw ParameterError("Sobolev norm of a functional needs s > d = 1");
  if (hbar_grid.empty()) throw ParameterError("empty hbar grid");
  SobolevNormReport rep;
  double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
  for (double h : hbar_grid) {
    QuantScheme sc = base;
    sc.hbar = h;
    sc.check_truncation = false;
    const PrincipalSeries pi(r, PrincipalSeries::default_K_max(h));
    const Symbol a = sobolev_for(pi, h, s, kappa).a_inv;
    SobolevNormRow row;
    row.hbar = h;
    row.K_max = pi.K_max();
    const double inner = pairing_on(a, I, pi, sc).real();
    // K-types past the interior block: principal symbol on the orbit.
    auto a_at = [&](int k) { return 1.0 / sobolev_b(h, s, kappa, h * std::sqrt(double(k) * k + 2.0 * r * r)); };
    const int Kin = pi.interior_K();
    double tail = 0.0, mean = 0.0;
    int cnt = 0;
    for (int k = Kin + 2; k <= I.K_max(); k += 2) tail += (std::norm(I.iota(k)) + std::norm(I.iota(-k))) * a_at(k);
    const int K0 = std::max(Kin, I.K_max());
    for (int k = std::max(2, K0 / 2); k <= I.K_max(); k += 2) {
      mean += std::norm(I.iota(k)) + std::norm(I.iota(-k));
      ++cnt;
    }
    if (cnt > 0) {
      mean /= cnt;
      // sum over k > K0 (step 2) of a_at(k), a ~ k^{-s}: explicit sum then power-law remainder
      const int Kfar = 64 * K0;
      double far = 0.0;
      for (int k = K0 + 2; k <= Kfar; k += 2) far += a_at(k);
      far += a_at(Kfar) * Kfar / (2.0 * (s - 1.0));
      tail += mean * far;
    }
    row.tail = tail;
    row.value = inner + tail;
    mn = std::min(mn, row.value);
    mx = std::max(mx, row.value);
    rep.rows.push_back(row);
  }
  rep.ratio = mn > 0 ? mx / mn : std::numeric_limits<double>::infinity();
  return rep;
}

nlohmann::json SupNormReport::to_json() const {
  return {{"I_sq", I_sq}, {"H_form", H_form}, {"ratio", ratio}, {"norm", norm}};
}

SupNormReport sup_norm_bound_report(const KTypeVector& v, const FunctionalModel& I, double s, double kappa,
                                    const PrincipalSeries& pi, const QuantScheme& scheme) {
  if (!(s > 1.0)) throw ParameterError("sup-norm bound needs s > d = 1");
  if (v.K_max != pi.K_max()) throw ParameterError("vector and representation disagree on K_max");
  SupNormReport rep;
  rep.norm = v.norm();
  if (std::abs(rep.norm - 1.0) > 1e-8) throw ParameterError("sup-norm bound expects a unit vector");
  rep.I_sq = std::norm(I.apply(v));
  QuantScheme sc = scheme;
  sc.interior_columns_only = true;
  sc.check_truncation = false;
  const OperatorMatrix B = assemble_op(sobolev_for(pi, scheme.hbar, s, kappa).b, pi, sc);
  const CVector u = interior_vector(v, pi);
  rep.H_form = u.dot(B.interior() * u).real();
  rep.ratio = rep.H_form > 0 ? rep.I_sq / rep.H_form : std::numeric_limits<double>::infinity();
  return rep;
}

KTypeVector microlocalized_vector(const Symbol& a, const FunctionalModel& I, const PrincipalSeries& pi,
                                  const QuantScheme& scheme) {
  QuantScheme sc = scheme;
  sc.interior_columns_only = false;
  const OperatorMatrix M = assemble_op(a, pi, sc);
  const CVector v = interior_vector(I.vector_for(pi), pi);
  KTypeVector out;
  out.K_max = pi.K_max();
  out.coeffs = M.entries.middleCols(pi.interior_begin(), pi.interior_dim()) * v;
  const double n = out.coeffs.norm();
  if (!(n > 0.0)) throw NumericalError("Op(a) annihilates v_I");
  out.coeffs /= n;
  return out;
}

}  // namespace orbitlab
