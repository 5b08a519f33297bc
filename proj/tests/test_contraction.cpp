#include <cmath>

#include "doctest.h"
#include "orbitlab/contraction.hpp"
#include "orbitlab/error.hpp"
#include "orbitlab/orbits.hpp"

using namespace orbitlab;

TEST_CASE("contraction element for the E-dual covector") {
  const Covector xi0 = nilpotent_regular_point();
  const double h = 0.1, theta = 0.3;
  const GroupMatrix g = make_contraction_element(xi0, h, theta);
  // diagonal, lambda^2 = h^theta up to the orientation of the torus
  CHECK(std::abs(g(0, 1)) < 1e-14);
  CHECK(std::abs(g(1, 0)) < 1e-14);
  const double lam2 = g(0, 0) * g(0, 0);
  CHECK(std::min(std::abs(lam2 - std::pow(h, theta)), std::abs(1.0 / lam2 - std::pow(h, theta))) < 1e-12);
  const ContractionCheck c = check_contraction(g, xi0, h, theta);
  CHECK(c.ratio == doctest::Approx(std::pow(h, theta)).epsilon(1e-10));
  CHECK(c.coad_norm * c.ratio == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(c.C2 == doctest::Approx(1.0).epsilon(1e-8));
  const Vec3 img = apply_coadjoint(g, xi0).ortho();
  CHECK((img - std::pow(h, theta) * xi0.ortho()).norm() < 1e-12);
}

TEST_CASE("contraction element at other points and limits") {
  const Covector xi0 = nilpotent_regular_point(Vec3(1.0, 0.3, 0.0), -1);
  for (double theta : {0.05, 0.2, 0.4}) {
    const GroupMatrix g = make_contraction_element(xi0, 0.05, theta);
    const Vec3 img = apply_coadjoint(g, xi0).ortho();
    CHECK((img - std::pow(0.05, theta) * xi0.ortho()).norm() < 1e-10);
  }
  const GroupMatrix g0 = make_contraction_element(xi0, 0.05, 1e-9);
  CHECK((g0.matrix() - Mat2::Identity()).norm() < 1e-8);
  CHECK_THROWS_AS(make_contraction_element(xi0, 0.1, 0.0), ParameterError);
  CHECK_THROWS_AS(make_contraction_element(xi0, 0.1, 1.0), ParameterError);
  CHECK_THROWS_AS(make_contraction_element(xi0, 2.0, 0.3), ParameterError);
  CHECK_THROWS(make_contraction_element(Covector::from_ortho(Vec3(1, 0, 0)), 0.1, 0.3));
}

TEST_CASE("parameter ranges") {
  ContractionParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(p.s() == doctest::Approx(1.01));
  ContractionParams q = p;
  q.theta = 0.32;
  CHECK_THROWS_AS(q.validate(), ParameterError);
  q = p;
  q.kappa = 0.6;
  CHECK_THROWS_AS(q.validate(), ParameterError);
  q.coupled = false;
  CHECK_NOTHROW(q.validate());
  q = p;
  q.delta = 0.5;
  q.kappa = 0.5;
  CHECK_THROWS_AS(q.validate(), ParameterError);
}

TEST_CASE("star bound") {
  ContractionParams p;
  const StarBoundReport r = star_bound(p, 1.0, default_star_grid());
  CHECK(r.sigma_closed == doctest::Approx(1.01 * 0.29 - 0.01).epsilon(1e-12));
  CHECK(std::abs(r.sigma_fit - r.sigma_closed) < 0.02);
  // closed form at a single point
  CHECK(star_value(p, 1.0, 0.01) ==
        doctest::Approx(std::pow(0.01, -1.01) * std::pow(std::pow(0.01, 0.6) + std::pow(0.01, 0.58), 0.505)));
  // theta to zero: no gain
  p.theta = 1e-6;
  CHECK(sigma_closed_form(p) == doctest::Approx(-p.eps).epsilon(1e-3));
  CHECK(star_bound(p, 1.0, default_star_grid()).sigma_fit < 0.0);
  // monotone in theta up to the constraint
  double prev = -1.0;
  for (double th : {0.05, 0.1, 0.15, 0.2, 0.25, 0.3}) {
    p.theta = th;
    const double s = star_bound(p, 1.0, default_star_grid()).sigma_fit;
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("optimized sigma") {
  const SigmaOptimum o = optimize_sigma(0.3);
  CHECK(std::abs(o.sigma_fit - 0.28) < 0.03);
  CHECK(std::abs(o.sigma_fit - o.sigma_closed) < 0.02);
  CHECK(o.params.kappa > 0.5);
  CHECK(o.params.kappa < 1.0);
  double prev = 0.0;
  for (double d : {0.1, 0.2, 0.3, 0.4}) {
    const SigmaOptimum s = optimize_sigma(d);
    CHECK(s.sigma_fit > 0.02);
    CHECK(s.sigma_fit > prev);
    prev = s.sigma_fit;
  }
  CHECK(optimize_sigma(0.01).sigma_fit < 0.01);
}

TEST_CASE("bound chain on a coarse grid") {
  const FunctionalModel I = synthetic_functional(1.5, 11, 1024);
  ContractionParams p;
  SmallBallSpec spec;
  spec.delta = p.delta;
  const BoundChainReport rep = bound_chain(spec, I, p, 1.0, QuantScheme{}, {0.2, 0.1});
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.automorphic_link == "assumed");
  for (const ChainRow& r : rep.rows) {
    CHECK(r.star_ratio <= 3.0);
    CHECK(r.radius_ratio == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.center_error < 1e-8);
    CHECK(r.sqrt_link < 0.1);
    CHECK(r.tail < 1e-4);
    CHECK(r.contraction.ratio == doctest::Approx(std::pow(r.hbar, p.theta)).epsilon(1e-10));
  }
  // the uncontracted side grows like hbar^{-s}
  CHECK(std::abs(rep.uncontracted_fit.slope + p.s()) < 0.1);
  CHECK(rep.contracted_fit.slope > rep.uncontracted_fit.slope);

  SmallBallSpec other = spec;
  other.delta = 0.2;
  CHECK_THROWS_AS(bound_chain(other, I, p, 1.0, QuantScheme{}, {0.2, 0.1}), ParameterError);
  CHECK_THROWS_AS(bound_chain(spec, I, p, 1.0, QuantScheme{}, {0.2}), ParameterError);
  const FunctionalModel small = synthetic_functional(1.5, 11, 32);
  CHECK_THROWS_AS(bound_chain(spec, small, p, 1.0, QuantScheme{}, {0.2, 0.1}), TruncationError);
  // an impossible star factor names the link
  ChainOptions strict;
  strict.star_factor = 0.1;
  try {
    bound_chain(spec, I, p, 1.0, QuantScheme{}, {0.2, 0.1}, strict);
    FAIL("expected a failing link");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("star link") != std::string::npos);
  }
}
