#include <cmath>
#include <random>

#include "doctest.h"
#include "orbitlab/error.hpp"
#include "orbitlab/orbits.hpp"

using namespace orbitlab;

TEST_CASE("principal series orbits and scaling") {
  const CoadjointOrbit o = orbit_of_principal_series(1.0);
  const Covector h_dir = Covector::from_ortho(Vec3(kSqrt2, 0, 0));
  CHECK(h_dir.casimir() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(o.contains(h_dir));
  CHECK_FALSE(o.contains(nilpotent_regular_point()));
  CHECK_THROWS_AS(orbit_of_principal_series(0.0), ParameterError);
  const CoadjointOrbit s = scale_orbit(o, 0.5);
  CHECK(s.level == 0.5);
  CHECK(scale_orbit(o, 1.0).level == o.level);
  const OrbitQuadrature q = make_orbit_quadrature(s, -2, 3, 4, 16);
  for (const auto& n : q.nodes) CHECK(std::abs(n.casimir() - 0.25) < 1e-10);
  // h -> 0: nodes approach the nilcone linearly in h r
  double prev = 1e9;
  for (double h : {0.2, 0.1, 0.05, 0.025}) {
    const OrbitQuadrature qh = make_orbit_quadrature(scale_orbit(o, h), -1, 1, 2, 8);
    double d = 0;
    for (const auto& n : qh.nodes) d = std::max(d, distance_to_nilcone(n.ortho()));
    CHECK(d < prev);
    CHECK(d <= h * 1.0 + 1e-12);
    prev = d;
  }
}

TEST_CASE("orbit integrals") {
  const CoadjointOrbit o = orbit_of_principal_series(1.0);
  CHECK(orbit_integral(make_zero(), o) == 0.0);
  // a window of constant symbol: area (zeta_hi - zeta_lo) / sqrt2
  SymbolMeta m;
  m.support.kind = SupportDescriptor::Kind::Global;
  const Symbol one([](const Vec3&) { return cplx(1.0); }, nullptr, m);
  OrbitIntegralOptions opt;
  opt.zeta_lo = -0.7;
  opt.zeta_hi = 1.3;
  CHECK(orbit_integral_detailed(one, o, opt).value.real() == doctest::Approx(2.0 / kSqrt2).epsilon(1e-3));
  // degree-1 homogeneity of the canonical measure: window scales with h
  opt.zeta_lo = -0.7 * 0.3;
  opt.zeta_hi = 1.3 * 0.3;
  CHECK(orbit_integral_detailed(one, scale_orbit(o, 0.3), opt).value.real() ==
        doctest::Approx(0.3 * 2.0 / kSqrt2).epsilon(1e-3));
  // far Gaussian
  const Symbol far = make_gaussian(Vec3(0, 0, 0), 0.05);
  CHECK(std::abs(orbit_integral(far, o)) < 1e-8);
  // self-consistency: two resolutions agree
  const Symbol g = make_gaussian(Vec3(kSqrt2, 0, 0), 0.4);
  const OrbitIntegral r = orbit_integral_detailed(g, o);
  CHECK(r.last_change < 1e-3);
  // Gaussian centred on the orbit: compare with a 2-D reference integral
  const double ref = [&] {
    double s = 0;
    const int nz = 2000, np = 2000;
    for (int i = 0; i < nz; ++i) {
      const double z = -4 + 8.0 * (i + 0.5) / nz;
      for (int j = 0; j < np; ++j) s += g.at(o.point(z, 2 * M_PI * j / np)).real();
    }
    return s * (8.0 / nz) * (2 * M_PI / np) * kOrbitMeasure;
  }();
  CHECK(r.value.real() == doctest::Approx(ref).epsilon(1e-3));
}

TEST_CASE("coadjoint invariance and homogeneity of orbit integrals") {
  const CoadjointOrbit o = orbit_of_principal_series(1.0);
  const Symbol g = make_gaussian(Vec3(kSqrt2, 0.3, 0.2), 0.4);
  const double base = orbit_integral(g, o);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 0.4);
  for (int i = 0; i < 5; ++i) {
    const GroupMatrix k = exp_map(AlgebraVector(n(rng), n(rng), n(rng)));
    CHECK(orbit_integral(act(k, g), o) == doctest::Approx(base).epsilon(5e-3));
  }
  // int_{hO} a d omega = h int_O a(h .) d omega
  const double h = 0.25;
  const Symbol gh = make_gaussian(h * Vec3(kSqrt2, 0.3, 0.2), 0.4 * h);
  CHECK(orbit_integral(gh, scale_orbit(o, h)) == doctest::Approx(h * base).epsilon(2e-3));
}

TEST_CASE("nilpotent points, triples and stabilisers") {
  const Covector xi0 = nilpotent_regular_point();
  CHECK(std::abs(xi0.casimir()) < 1e-12);
  CHECK(xi0.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((xi0.coords() - Covector::dual_of(kE).coords()).norm() < 1e-15);
  CHECK(nilcone(+1).contains(xi0));
  CHECK_FALSE(nilcone(-1).contains(xi0));
  CHECK(nilcone(-1).contains(nilpotent_regular_point(-1)));
  for (double th : {0.3, 1.1, 2.5}) {
    const Covector k = apply_coadjoint(GroupMatrix::rotation(th), xi0);
    CHECK(std::abs(k.casimir()) < 1e-12);
  }
  const Sl2Triple t = sl2_triple_through(xi0);
  CHECK((t.h.coords() - kH.coords()).norm() < 1e-12);
  CHECK((t.e.coords() - kE.coords()).norm() < 1e-12);
  CHECK((t.f.coords() - kF.coords()).norm() < 1e-12);
  // conjugated triple
  const GroupMatrix g = exp_map(AlgebraVector(0.3, -0.5, 0.2)) * GroupMatrix::rotation(1.0);
  for (int sign : {1, -1}) {
    const Covector x = apply_coadjoint(g, nilpotent_regular_point(sign));
    const Sl2Triple c = sl2_triple_through(x);
    CHECK((bracket(c.h, c.e) - c.e * 2.0).coords().norm() < 1e-10);
    CHECK((bracket(c.h, c.f) + c.f * 2.0).coords().norm() < 1e-10);
    CHECK((bracket(c.e, c.f) - c.h).coords().norm() < 1e-10);
    CHECK((Covector::dual_of(c.e).coords() - x.coords()).norm() < 1e-10);
  }
  // exp(t h') scales xi0 by e^{2t}
  const Covector moved = apply_coadjoint(exp_map(t.h * 0.3), xi0);
  CHECK((moved.coords() - xi0.coords() * std::exp(0.6)).norm() < 1e-12);
  const AlgebraVector n = stabilizer_generator(xi0);
  CHECK(std::abs(n.coords()[0]) < 1e-15);
  CHECK(std::abs(n.coords()[2]) < 1e-15);
  for (double tt = -5; tt <= 5; tt += 0.5)
    CHECK((apply_coadjoint(exp_map(n * tt), xi0).coords() - xi0.coords()).norm() < 1e-10);
  CHECK((apply_coadjoint(exp_map(t.h * 0.1), xi0).coords() - xi0.coords()).norm() >= 1e-2);
  CHECK_THROWS_AS(sl2_triple_through(Covector()), DomainError);
  CHECK_THROWS_AS(stabilizer_generator(Covector(1, 0, 0)), DomainError);
}
