#include "orbitlab/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "orbitlab/error.hpp"
#include "orbitlab/quadrature.hpp"

namespace orbitlab {

namespace {

void check_regular_nilpotent(const Covector& xi0) {
  const double n = xi0.norm();
  if (!(n > 1e-12)) throw DomainError("degenerate covector: xi0 = 0");
  if (std::abs(xi0.casimir()) > 1e-10 * n * n) throw DomainError("degenerate covector: xi0 is not nilpotent");
}

}  // namespace

bool CoadjointOrbit::contains(const Covector& xi, double tol) const {
  const Vec3 v = xi.ortho();
  const double c = casimir_ortho(v);
  const double scale = std::max(1.0, v.squaredNorm());
  if (std::abs(c - casimir_level()) > tol * scale) return false;
  if (kind == Kind::NilpotentRegular) {
    if (v.norm() < tol) return false;
    if (sheet != 0 && sheet * v[2] > 0) return false;  // nappe of xi0 dual to E has xi3 < 0
  }
  return true;
}

Vec3 CoadjointOrbit::point(double zeta, double phi) const {
  const double rho = std::sqrt(zeta * zeta + 2.0 * level * level);
  return Vec3(rho * std::cos(phi), rho * std::sin(phi), zeta);
}

CoadjointOrbit orbit_of_principal_series(double r) {
  if (!(r > 0.0)) throw ParameterError("principal series orbit needs r > 0 (use nilcone())");
  CoadjointOrbit o;
  o.kind = CoadjointOrbit::Kind::TemperedPrincipal;
  o.level = r;
  return o;
}

CoadjointOrbit nilcone(int sheet) {
  CoadjointOrbit o;
  o.kind = CoadjointOrbit::Kind::NilpotentRegular;
  o.level = 0.0;
  o.sheet = sheet;
  return o;
}

CoadjointOrbit scale_orbit(const CoadjointOrbit& o, double hbar) {
  if (o.kind != CoadjointOrbit::Kind::TemperedPrincipal) throw ParameterError("only principal series orbits scale");
  if (!(hbar > 0.0 && hbar <= 1.0)) throw ParameterError("hbar must lie in (0, 1]");
  CoadjointOrbit s = o;
  s.level = o.level * hbar;
  return s;
}

std::string OrbitQuadrature::describe() const {
  std::ostringstream os;
  os << "zeta[" << zeta_lo << "," << zeta_hi << "] panels=" << zeta_panels << "x" << gauss_order
     << " phi=" << phi_points;
  return os.str();
}

OrbitQuadrature make_orbit_quadrature(const CoadjointOrbit& o, double zeta_lo, double zeta_hi, int panels,
                                      int phi_points, int gauss_order) {
  if (!(zeta_hi > zeta_lo) || panels < 1 || phi_points < 1) throw ParameterError("bad orbit quadrature resolution");
  OrbitQuadrature q;
  q.target = o;
  q.zeta_lo = zeta_lo;
  q.zeta_hi = zeta_hi;
  q.zeta_panels = panels;
  q.gauss_order = gauss_order;
  q.phi_points = phi_points;
  const auto& gl = gauss_legendre(gauss_order);
  const double hz = (zeta_hi - zeta_lo) / panels;
  const double wphi = 2.0 * M_PI / phi_points;
  const Mat3 to_dual = dual_to_ortho().inverse();
  for (int p = 0; p < panels; ++p) {
    for (size_t i = 0; i < gl.nodes.size(); ++i) {
      const double zeta = zeta_lo + hz * (p + 0.5 * (gl.nodes[i] + 1.0));
      if (o.kind == CoadjointOrbit::Kind::NilpotentRegular && o.sheet != 0 && o.sheet * zeta > 0) continue;
      const double wz = 0.5 * hz * gl.weights[i];
      for (int j = 0; j < phi_points; ++j) {
        const Vec3 v = o.point(zeta, j * wphi);
        q.nodes.emplace_back(Vec3(to_dual * v));
        q.weights.push_back(wz * wphi * kOrbitMeasure);
      }
    }
  }
  return q;
}

OrbitIntegral orbit_integral_detailed(const Symbol& a, const CoadjointOrbit& o, const OrbitIntegralOptions& opt) {
  double lo = opt.zeta_lo, hi = opt.zeta_hi;
  const auto& sp = a.meta().support;
  double feature = 0.0;
  if (!(hi > lo)) {
    if (sp.kind == SupportDescriptor::Kind::Global)
      throw ParameterError("orbit integral of a globally supported symbol needs an explicit window");
    if (sp.radius == 0.0) return OrbitIntegral{0.0, 0.0, 0, {}};
    lo = sp.center[2] - sp.radius;
    hi = sp.center[2] + sp.radius;
    feature = sp.radius;
  } else {
    feature = std::min(hi - lo, sp.kind == SupportDescriptor::Kind::Global ? hi - lo : sp.radius);
  }
  const double rho_max = std::sqrt(std::max(lo * lo, hi * hi) + 2.0 * o.casimir_level());
  int panels = std::max(4, static_cast<int>(std::ceil(4.0 * (hi - lo) / feature)));
  int nphi = std::max(32, static_cast<int>(std::ceil(16.0 * M_PI * rho_max / feature)));

  auto evaluate = [&](const OrbitQuadrature& q) {
    std::vector<double> re(q.nodes.size()), im(q.nodes.size());
    for (size_t i = 0; i < q.nodes.size(); ++i) {
      const cplx v = a(q.nodes[i]) * q.weights[i];
      re[i] = v.real();
      im[i] = v.imag();
    }
    return cplx(pairwise_sum(re), pairwise_sum(im));
  };

  OrbitIntegral out;
  OrbitQuadrature q = make_orbit_quadrature(o, lo, hi, panels, nphi);
  cplx prev = evaluate(q);
  for (int level = 1; level <= opt.max_refinements; ++level) {
    panels *= 2;
    nphi *= 2;
    OrbitQuadrature q2 = make_orbit_quadrature(o, lo, hi, panels, nphi);
    const cplx cur = evaluate(q2);
    const double change = std::abs(cur - prev);
    out.value = cur;
    out.refinements = level;
    out.last_change = std::abs(cur) > 0 ? change / std::abs(cur) : 0.0;
    out.final_rule = std::move(q2);
    if (change <= opt.rel_tol * std::abs(cur) + opt.abs_tol) return out;
    prev = cur;
  }
  throw NumericalError("orbit integral refinement stalled (last relative change " +
                       std::to_string(out.last_change) + ")");
}

double orbit_integral(const Symbol& a, const CoadjointOrbit& o) { return orbit_integral_detailed(a, o).value.real(); }

double distance_to_nilcone(const Vec3& v) {
  const double rho = std::hypot(v[0], v[1]);
  return std::abs(rho - std::abs(v[2])) / kSqrt2;
}

Covector nilpotent_regular_point(int sign) { return nilpotent_regular_point(Vec3(0, 1, -1), sign); }

Covector nilpotent_regular_point(const Vec3& seed, int sign) {
  // The seed fixes the angle in the (xi1, xi2) plane. The "+" nappe is the one
  // of the E-dual covector (xi3 < 0); sign < 0 reflects through the origin.
  double phi = std::atan2(seed[1], seed[0]);
  if (seed[0] == 0.0 && seed[1] == 0.0) phi = M_PI / 2;
  Vec3 v = Vec3(std::cos(phi), std::sin(phi), -1.0) / kSqrt2;
  if (sign < 0) v = -v;
  return Covector::from_ortho(v);
}

Sl2Triple sl2_triple_through(const Covector& xi0) {
  check_regular_nilpotent(xi0);
  const Mat2 N = xi0.to_algebra().matrix();
  // N = s g E g^{-1} with g = [v u]: entries [[-v1 v2, v1^2], [-v2^2, v1 v2]] times s
  const double s = std::abs(N(0, 1)) >= std::abs(N(1, 0)) ? (N(0, 1) > 0 ? 1.0 : -1.0) : (N(1, 0) < 0 ? 1.0 : -1.0);
  double v1, v2;
  if (std::abs(N(0, 1)) >= std::abs(N(1, 0))) {
    v1 = std::sqrt(s * N(0, 1));
    v2 = -N(0, 0) / (s * v1);
  } else {
    v2 = std::sqrt(-s * N(1, 0));
    v1 = N(1, 1) / (s * v2);
  }
  const double n2 = v1 * v1 + v2 * v2;
  const GroupMatrix g(v1, -v2 / n2, v2, v1 / n2);
  const Mat2 gi = g.inverse().matrix();
  Sl2Triple t;
  t.h = AlgebraVector::from_matrix(g.matrix() * kH.matrix() * gi);
  t.e = AlgebraVector::from_matrix(N);
  t.f = AlgebraVector::from_matrix(s * g.matrix() * kF.matrix() * gi);
  const double err = (bracket(t.h, t.e) - t.e * 2.0).coords().norm() + (bracket(t.h, t.f) + t.f * 2.0).coords().norm() +
                     (bracket(t.e, t.f) - t.h).coords().norm();
  if (err > 1e-10 * std::max(1.0, t.h.norm() * t.e.norm() + t.f.norm())) throw NumericalError("sl2 triple relations fail");
  return t;
}

AlgebraVector stabilizer_generator(const Covector& xi0) {
  check_regular_nilpotent(xi0);
  const AlgebraVector e = xi0.to_algebra();
  return e * (1.0 / e.norm());
}

}  // namespace orbitlab
