#include "orbitlab/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "orbitlab/error.hpp"
#include "orbitlab/orbits.hpp"
#include "orbitlab/quantize.hpp"

namespace orbitlab {

namespace {

Mat3 ortho_coad(const GroupMatrix& g) { return dual_to_ortho() * coadjoint(g) * dual_to_ortho().inverse(); }

std::string num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

void ContractionParams::validate() const {
  if (!(delta > 0.0 && delta < 0.5)) throw ParameterError("delta must lie in (0, 1/2), got " + num(delta));
  if (!(kappa > 0.5 && kappa < 1.0)) throw ParameterError("kappa must lie in (1/2, 1), got " + num(kappa));
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  if (!(theta > 0.0 && theta < delta + eps))
    throw ParameterError("theta must lie in (0, delta + eps), got " + num(theta));
  if (coupled && std::abs(delta - (1.0 - kappa)) > 1e-12)
    throw ParameterError("coupled parameters need delta = 1 - kappa");
}

nlohmann::json ContractionParams::to_json() const {
  return {{"delta", delta}, {"kappa", kappa}, {"theta", theta}, {"eps", eps}, {"s", s()}, {"coupled", coupled}};
}

nlohmann::json ContractionCheck::to_json() const {
  return {{"ratio", ratio}, {"coad_norm", coad_norm}, {"ad_norm", ad_norm}, {"C2", C2}, {"C3", C3}};
}

GroupMatrix make_contraction_element(const Covector& xi0, double hbar, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw ParameterError("contraction exponent must lie in (0, 1)");
  if (!(hbar > 0.0 && hbar <= 1.0)) throw ParameterError("hbar must lie in (0, 1]");
  const Sl2Triple tr = sl2_triple_through(xi0);
  // Ad*(exp(t h)) xi0 = e^{c t} xi0; c = +-2 depending on the pairing convention
  const double c = std::log(apply_coadjoint(exp_map(tr.h), xi0).norm() / xi0.norm());
  if (!(std::abs(c) > 1.0)) throw NumericalError("h does not scale xi0");
  const double t = theta * std::log(hbar) / c;
  return exp_map(tr.h * t);
}

ContractionCheck check_contraction(const GroupMatrix& g, const Covector& xi0, double hbar, double theta) {
  ContractionCheck c;
  c.ratio = apply_coadjoint(g, xi0).norm() / xi0.norm();
  const GroupNorms n = norms(g);
  c.coad_norm = n.coad;
  c.ad_norm = n.ad;
  c.C2 = n.coad * std::pow(hbar, theta);
  c.C3 = 0.0;
  return c;
}

void assert_contraction(const ContractionCheck& c, const ContractionParams& p, double c_max) {
  if (!(c.C2 <= c_max)) throw ValidationError("condition (2) fails: ||Ad*(g)|| hbar^theta = " + num(c.C2));
  if (!(c.C3 <= c_max)) throw ValidationError("condition (3) fails: ||Ad(g)|| hbar^(1-delta-eps) = " + num(c.C3));
  (void)p;
}

double star_value(const ContractionParams& p, double xi0_norm, double hbar) {
  const double s = p.s();
  return std::pow(hbar, -s) *
         std::pow(std::pow(hbar, 2.0 * (1.0 - p.kappa)) + std::pow(hbar, 2.0 * p.theta) * xi0_norm * xi0_norm, s / 2);
}

double sigma_closed_form(const ContractionParams& p) { return p.s() * std::min(1.0 - p.kappa, p.theta) - p.eps; }

nlohmann::json StarBoundReport::to_json() const {
  return {{"hbar", hbar_grid}, {"star", values},          {"fit", fit.to_json()},
          {"sigma_fit", sigma_fit}, {"sigma_closed", sigma_closed}};
}

std::vector<double> default_star_grid() {
  std::vector<double> g;
  for (int j = 4; j <= 20; j += 2) g.push_back(std::ldexp(1.0, -j));
  return g;
}

StarBoundReport star_bound(const ContractionParams& p, double xi0_norm, const std::vector<double>& hbar_grid) {
  p.validate();
  StarBoundReport r;
  r.hbar_grid = hbar_grid;
  for (double h : hbar_grid) r.values.push_back(star_value(p, xi0_norm, h));
  r.fit = fit_power_law(r.hbar_grid, r.values);
  r.sigma_fit = r.fit.slope + kHalfOrbitDim;
  r.sigma_closed = sigma_closed_form(p);
  return r;
}

nlohmann::json SigmaOptimum::to_json() const {
  return {{"params", params.to_json()},
          {"sigma_fit", sigma_fit},
          {"sigma_closed", sigma_closed},
          {"candidates", candidates}};
}

SigmaOptimum optimize_sigma(double delta, double xi0_norm) {
  if (!(delta > 0.0 && delta < 0.5)) throw ParameterError("delta must lie in (0, 1/2)");
  const std::vector<double> grid = default_star_grid();
  SigmaOptimum best;
  best.sigma_fit = -std::numeric_limits<double>::infinity();
  for (double eps : {0.01, 0.05}) {
    const int n = 200;
    for (int j = 1; j < n; ++j) {
      ContractionParams p;
      p.delta = delta;
      p.kappa = 1.0 - delta;
      p.eps = eps;
      p.theta = (delta + eps) * j / n;
      const StarBoundReport r = star_bound(p, xi0_norm, grid);
      ++best.candidates;
      // ties go to the smaller theta, which keeps the contracted support small
      if (r.sigma_fit > best.sigma_fit + 1e-9) {
        best.sigma_fit = r.sigma_fit;
        best.sigma_closed = r.sigma_closed;
        best.params = p;
      }
    }
  }
  return best;
}

Symbol SmallBallSpec::at(double hbar) const { return make_small_ball(hbar, xi0, delta, profile); }

nlohmann::json SmallBallSpec::to_json() const {
  const Vec3 x = xi0.ortho();
  return {{"xi0", {x[0], x[1], x[2]}}, {"delta", delta}, {"profile", profile.name()}, {"sigma", profile.sigma}};
}

nlohmann::json ChainRow::to_json() const {
  return {{"hbar", hbar},
          {"K_max", K_max},
          {"Eh", Eh},
          {"sqrt_link", sqrt_link},
          {"c_sq", c_sq},
          {"phi_sq", phi_sq},
          {"tail", tail},
          {"sup_uncontracted", sup_uncontracted},
          {"b_at_center", b_at_center},
          {"sup_contracted", sup_contracted},
          {"star", star},
          {"star_ratio", star_ratio},
          {"center_error", center_error},
          {"radius_ratio", radius_ratio},
          {"contraction", contraction.to_json()}};
}

nlohmann::json BoundChainReport::to_json() const {
  nlohmann::json rj = nlohmann::json::array();
  for (const auto& r : rows) rj.push_back(r.to_json());
  return {{"rows", rj},
          {"params", params.to_json()},
          {"functional", functional},
          {"automorphic_link", automorphic_link},
          {"Eh_fit", Eh_fit.to_json()},
          {"uncontracted_fit", uncontracted_fit.to_json()},
          {"contracted_fit", contracted_fit.to_json()},
          {"sigma_closed", sigma_closed},
          {"max_star_ratio", max_star_ratio}};
}

namespace {

// Reference point of the profile used to read off a radius: the e^{-1/2}
// level for the Gaussian, half the support for the plateau bump.
double reference_u(const BumpProfile& p) { return p.kind == BumpProfile::Kind::Gauss ? p.sigma : 0.5; }

// Weighted centroid of a symbol on a grid spanning the image of the ball.
Vec3 symbol_centroid(const Symbol& a, const Vec3& c, const Mat3& frame, const Vec3& half) {
  const int n = 12;
  Vec3 acc = Vec3::Zero();
  double w = 0.0;
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j)
      for (int k = -n; k <= n; ++k) {
        const Vec3 u(half[0] * i / n, half[1] * j / n, half[2] * k / n);
        const Vec3 x = c + frame * u;
        const double v = std::abs(a.at(x));
        acc += v * x;
        w += v;
      }
  if (!(w > 0.0)) throw NumericalError("contracted symbol vanishes on its support");
  return acc / w;
}

// Distance t along dir at which a drops to `level` times its value at c.
double level_distance(const Symbol& a, const Vec3& c, const Vec3& dir, double level, double t_max) {
  const double peak = std::abs(a.at(c));
  double lo = 0.0, hi = t_max;
  if (std::abs(a.at(c + hi * dir)) > level * peak) throw NumericalError("contracted symbol does not decay");
  for (int it = 0; it < 80; ++it) {
    const double m = 0.5 * (lo + hi);
    (std::abs(a.at(c + m * dir)) > level * peak ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

// Diagonal of Op(b) for the K-invariant Sobolev symbol. Op(b) is diagonal in
// the K-types; outside the interior block the principal symbol at the orbit
// point above k stands in.
std::vector<double> sobolev_diagonal(const PrincipalSeries& pi, double hbar, double s, double kappa,
                                     const QuantScheme& base) {
  QuantScheme sc = base;
  sc.hbar = hbar;
  sc.interior_columns_only = true;
  sc.check_truncation = false;
  const SobolevPair sp = sobolev_for(pi, hbar, s, kappa);
  const OperatorMatrix B = assemble_op(sp.b, pi, sc);
  std::vector<double> d(pi.dim());
  for (int i = 0; i < pi.dim(); ++i) {
    const int k = pi.weight_of(i);
    d[i] = std::abs(k) <= pi.interior_K() ? B.entries(i, i).real()
                                          : sobolev_b(hbar, s, kappa, orbit_point_at(k, 0.0, hbar, pi.r()).norm());
  }
  return d;
}

double form_on(const std::vector<double>& diag, const CVector& w) {
  double acc = 0.0;
  for (int i = 0; i < w.size(); ++i) acc += diag[i] * std::norm(w[i]);
  return acc;
}

}  // namespace

BoundChainReport bound_chain(const SmallBallSpec& spec, const FunctionalModel& I, const ContractionParams& params,
                             double r, const QuantScheme& base, const std::vector<double>& hbar_grid,
                             const ChainOptions& opt) {
  params.validate();
  if (std::abs(spec.delta - params.delta) > 1e-12) throw ParameterError("small-ball delta differs from the chain delta");
  if (hbar_grid.size() < 2) throw ParameterError("bound chain needs at least two hbar values");
  if (nilcone().dim_half != kHalfOrbitDim) throw NumericalError("orbit dimension mismatch");
  BoundChainReport rep;
  rep.params = params;
  rep.functional = I.provenance();
  rep.automorphic_link = I.kind() == FunctionalModel::Kind::Maass ? "report-only" : "assumed";
  rep.sigma_closed = sigma_closed_form(params);
  const double s = params.s();
  const double xi0n = spec.xi0.norm();
  std::vector<double> hs, E, U, C;
  for (double h : hbar_grid) {
    ChainRow row;
    row.hbar = h;
    const Symbol a = spec.at(h);
    const Symbol ra = sqrt_symbol(a);
    const int K = orbit_covering_K(a, h, r);
    if (K > I.K_max()) throw TruncationError("functional known up to K = " + std::to_string(I.K_max()) + ", chain needs " + std::to_string(K));
    const PrincipalSeries pi(r, K);
    row.K_max = K;
    QuantScheme sc = base;
    sc.hbar = h;

    // (i) E_hbar(a) on the orbit-covering block
    EhOptions eo;
    eo.symmetric = false;
    eo.doubling = EhOptions::Doubling::Symbolic;
    const EhReport er = eval_Eh(a, I, pi, sc, eo);
    row.Eh = er.value;

    // (ii) w_a = Op(sqrt a) v_I = c w1
    QuantScheme full = sc;
    full.interior_columns_only = false;
    const OperatorMatrix Ra = assemble_op(ra, pi, full);
    const KTypeVector vI = I.vector_for(pi);
    const CVector v = vI.coeffs.segment(pi.interior_begin(), pi.interior_dim());
    CVector w = Ra.entries.middleCols(pi.interior_begin(), pi.interior_dim()) * v;
    row.c_sq = w.squaredNorm();
    row.sqrt_link = std::abs(row.Eh - row.c_sq) / std::abs(row.Eh);
    w /= std::sqrt(row.c_sq);
    KTypeVector w1;
    w1.K_max = K;
    w1.coeffs = w;
    row.phi_sq = std::norm(I.apply(w1));

    // (iii) uncontracted sup side
    const std::vector<double> bd = sobolev_diagonal(pi, h, s, params.kappa, sc);
    row.sup_uncontracted = form_on(bd, w);
    row.b_at_center = sobolev_b(h, s, params.kappa, xi0n);

    // (iv) contraction and the contracted symbol
    const GroupMatrix g = make_contraction_element(spec.xi0, h, params.theta);
    row.contraction = check_contraction(g, spec.xi0, h, params.theta);
    row.contraction.C3 = row.contraction.ad_norm * std::pow(h, 1.0 - params.delta - params.eps);
    const Symbol at = act(g, a);
    const Mat3 A = ortho_coad(g);
    Eigen::JacobiSVD<Mat3> svd(A, Eigen::ComputeFullU);
    const Vec3 c = A * spec.xi0.ortho();
    const double scale = std::pow(h, params.delta - params.theta);
    const double w0 = std::pow(h, params.delta);
    const double ue = spec.profile.effective_radius();
    const double reach = std::min(ue, 6.0 * std::max(1.0, spec.profile.sigma));
    const Vec3 half = svd.singularValues() * w0 * reach;
    row.center_error = (symbol_centroid(at, c, svd.matrixU(), half) - c).norm() / scale;
    const double uref = reference_u(spec.profile);
    const double t = level_distance(at, c, svd.matrixU().col(0), spec.profile(uref), 2.0 * half[0]);
    row.radius_ratio = t / uref / scale;

    // (v) contracted sup side
    const OperatorMatrix P = pi_of_g(pi, g);
    CVector wt = P.entries * w;
    const double in0 = w.segment(pi.interior_begin(), pi.interior_dim()).squaredNorm();
    const double in1 = wt.segment(pi.interior_begin(), pi.interior_dim()).squaredNorm();
    row.tail = std::max(1.0 - in0, 1.0 - in1 / wt.squaredNorm());
    row.sup_contracted = form_on(bd, wt);
    row.star = star_value(params, xi0n, h);
    row.star_ratio = row.sup_contracted / row.star;

    if (opt.enforce) {
      const double q = row.contraction.ratio / std::pow(h, params.theta);
      const std::string at_h = " at hbar = " + num(h);
      if (!(q >= 0.5 && q <= 2.0)) throw ValidationError("contraction link: ratio / hbar^theta = " + num(q) + at_h);
      assert_contraction(row.contraction, params);
      if (!(row.sqrt_link <= opt.sqrt_tol)) throw ValidationError("square-root link: " + num(row.sqrt_link) + at_h);
      if (!(row.center_error <= opt.center_tol))
        throw ValidationError("contracted center link: " + num(row.center_error) + at_h);
      if (!(row.radius_ratio >= opt.radius_lo && row.radius_ratio <= opt.radius_hi))
        throw ValidationError("contracted radius link: " + num(row.radius_ratio) + at_h);
      if (!(row.star_ratio <= opt.star_factor)) throw ValidationError("star link: ratio " + num(row.star_ratio) + at_h);
    }
    hs.push_back(h);
    E.push_back(row.Eh);
    U.push_back(row.sup_uncontracted);
    C.push_back(row.sup_contracted);
    rep.max_star_ratio = std::max(rep.max_star_ratio, row.star_ratio);
    rep.rows.push_back(row);
  }
  rep.Eh_fit = fit_power_law(hs, E);
  rep.uncontracted_fit = fit_power_law(hs, U);
  rep.contracted_fit = fit_power_law(hs, C);
  return rep;
}

}  // namespace orbitlab
