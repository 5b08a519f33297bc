#include <cmath>
#include <random>

#include "doctest.h"
#include "orbitlab/error.hpp"
#include "orbitlab/quadrature.hpp"
#include "orbitlab/symbols.hpp"

using namespace orbitlab;

namespace {

const Covector kXi0(0, 0, 1);  // dual to E, nilpotent, |xi0| = 1

double plateau_mass() {
  // int beta(|u|)^2 du over the unit ball
  const auto& gl = gauss_legendre(64);
  double s = 0.0;
  for (size_t i = 0; i < gl.nodes.size(); ++i) {
    const double u = 0.5 * (gl.nodes[i] + 1.0);
    const double b = standard_bump(u);
    s += 0.5 * gl.weights[i] * b * b * u * u;
  }
  return 4.0 * M_PI * s;
}

double lebesgue_integral(const Symbol& a, double h) {
  const auto& sp = a.meta().support;
  const int M = static_cast<int>(std::ceil(sp.radius / h)) + 1;
  double s = 0.0;
  for (int i = -M; i <= M; ++i)
    for (int j = -M; j <= M; ++j)
      for (int k = -M; k <= M; ++k) s += a.at(sp.center + Vec3(i, j, k) * h).real();
  return s * h * h * h;
}

Vec3 random_point(std::mt19937_64& rng, const Vec3& c, double R) {
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0, 1);
  Vec3 d(n(rng), n(rng), n(rng));
  return c + d * (R * std::cbrt(u(rng)) / d.norm());
}

}  // namespace

TEST_CASE("small-ball symbol, literal convention") {
  const double h = 0.1, delta = 0.3, w = std::pow(h, delta);
  const Symbol a = make_small_ball(h, kXi0, delta, {}, SmallBallCentering::Literal);
  CHECK(a.at(w * kXi0.ortho()).real() == doctest::Approx(1.0));
  // diameter along a line through the support centre
  const Vec3 c = w * kXi0.ortho();
  double lo = 0, hi = 0;
  for (double t = -2 * w; t <= 2 * w; t += w * 1e-4) {
    if (a.at(c + Vec3(t, 0, 0)).real() > 0.0) {
      if (lo == 0) lo = t;
      hi = t;
    }
  }
  CHECK((hi - lo) / w >= 1.9);
  CHECK((hi - lo) / w <= 2.1);
  // h = 1: unit ball around xi0
  const Symbol a1 = make_small_ball(1.0, kXi0, delta, {}, SmallBallCentering::Literal);
  CHECK((a1.meta().support.center - kXi0.ortho()).norm() < 1e-15);
  CHECK(a1.meta().support.radius == 1.0);
  CHECK_THROWS_AS(make_small_ball(h, kXi0, 0.5), ParameterError);
  CHECK_THROWS_AS(make_small_ball(h, kXi0, 0.0), ParameterError);
}

TEST_CASE("small-ball symbol, centred convention and mass") {
  const double h = 0.05, delta = 0.2, w = std::pow(h, delta);
  const Symbol a = make_small_ball(h, kXi0, delta);
  CHECK(a.at(kXi0.ortho()).real() == doctest::Approx(1.0));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const Vec3 p = random_point(rng, kXi0.ortho(), 3 * w);
    if ((p - kXi0.ortho()).norm() > 1.05 * w) CHECK(std::abs(a.at(p)) < 1e-14);
  }
  const double mass = lebesgue_integral(a, w / 40);
  CHECK(mass == doctest::Approx(std::pow(h, 3 * delta) * plateau_mass()).epsilon(0.005));
  // zero frequency of the inverse transform
  CHECK(a.ift().value(Vec3::Zero()).real() == doctest::Approx(mass / std::pow(2 * M_PI, 3)).epsilon(1e-3));
}

TEST_CASE("Sobolev symbols") {
  const double h = 0.1, s = 1.5, kappa = 0.7;
  const SobolevPair p = make_sobolev(h, s, kappa, Taper{});
  CHECK(p.b.at(Vec3::Zero()).real() == doctest::Approx(std::pow(h, -kappa * s)).epsilon(1e-13));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const Vec3 xi = random_point(rng, Vec3::Zero(), 5.0);
    CHECK((p.b.at(xi) * p.a_inv.at(xi)).real() == doctest::Approx(1.0).epsilon(1e-13));
  }
  const double rho = 10 * std::pow(h, 1 - kappa);
  CHECK(p.b.at(Vec3(rho, 0, 0)).real() == doctest::Approx(std::pow(h, -s) * std::pow(rho, s)).epsilon(0.01));
  // <xi/h>_r form with r = h^{-kappa}
  for (double r : {0.0, 0.3, 2.0})
    CHECK(sobolev_b_r(h, s, std::pow(h, -kappa), r) == doctest::Approx(sobolev_b(h, s, kappa, r)).epsilon(1e-12));
  CHECK_THROWS_AS(make_sobolev(h, s, 0.5, Taper{}), ParameterError);
  CHECK_THROWS_AS(make_sobolev(h, -1, 0.7, Taper{}), ParameterError);
  CHECK(japanese_bracket(Vec3(3, 0, 4), 0.0) == doctest::Approx(5.0));
}

TEST_CASE("square roots") {
  const Symbol z = sqrt_symbol(make_zero());
  CHECK(z.at(Vec3(0.1, 0.2, 0.3)) == cplx(0.0));
  const Symbol a = make_small_ball(0.1, kXi0, 0.3);
  const Symbol r = sqrt_symbol(a);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p = random_point(rng, a.meta().support.center, 1.1 * a.meta().support.radius);
    CHECK(std::abs(r.at(p) * r.at(p) - a.at(p)) < 1e-12);
  }
  const Symbol g = make_gaussian(Vec3(0.2, 0.1, 0), 0.4);
  const Symbol gr = sqrt_symbol(g);
  const Vec3 q(0.5, -0.3, 0.2);
  CHECK(gr.at(q).real() == doctest::Approx(std::exp(-0.25 * (q - Vec3(0.2, 0.1, 0)).squaredNorm() / 0.16)));
  CHECK_THROWS_AS(sqrt_symbol(scale(g, -1.0)), DomainError);
  // sqrt(a^2) = a
  const Symbol sq = sqrt_symbol(multiply(r, r));
  CHECK(std::abs(sq.at(kXi0.ortho()) - r.at(kXi0.ortho())) < 1e-12);
}

TEST_CASE("group action on symbols") {
  const Symbol a = make_gaussian(Vec3(0.3, -0.2, 0.5), 0.3);
  const GroupMatrix g1 = exp_map(AlgebraVector(0.3, 0.1, -0.4)), g2 = GroupMatrix::rotation(0.7) * GroupMatrix::diag(1.3);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const Vec3 p = random_point(rng, Vec3::Zero(), 2.0);
    CHECK(std::abs(act(GroupMatrix(), a).at(p) - a.at(p)) < 1e-15);
    CHECK(std::abs(act(g1 * g2, a).at(p) - act(g1, act(g2, a)).at(p)) < 1e-10);
  }
  // transform of the acted symbol against a grid recomputation
  const Symbol ga = act(g1, a);
  const GridInverseFT grid(ga, 64);
  for (int i = 0; i < 10; ++i) {
    const Vec3 x = random_point(rng, Vec3::Zero(), 3.0);
    CHECK(std::abs(ga.ift().value(x) - grid.value(x)) < 1e-6 * std::abs(ga.ift().value(Vec3::Zero())));
  }
  // contraction of a small ball by the torus
  const double h = 0.05, delta = 0.3, w = std::pow(h, delta);
  const Symbol sb = make_small_ball(h, kXi0, delta);
  const double lambda = std::pow(h, 0.25);  // Ad* scales the xi0 direction by lambda^2
  const GroupMatrix t = GroupMatrix::diag(lambda);
  const Symbol ct = act(t, sb);
  const Vec3 img = (dual_to_ortho() * coadjoint(t) * dual_to_ortho().inverse()) * kXi0.ortho();
  CHECK((ct.meta().support.center - img).norm() < 1e-12);
  CHECK(ct.meta().support.radius <= norms(t).coad * w * (1 + 1e-12));
  CHECK(ct.at(img).real() == doctest::Approx(1.0));
}

TEST_CASE("inverse Fourier transforms") {
  const Symbol g = make_gaussian(Vec3::Zero(), 1.0);
  // a^v(x) = (2pi)^{-3/2} e^{-|x|^2/2}
  const Vec3 x(0.4, -1.1, 0.7);
  CHECK(inverse_ft(g)(AlgebraVector::from_ortho(x)).real() ==
        doctest::Approx(std::pow(2 * M_PI, -1.5) * std::exp(-0.5 * x.squaredNorm())).epsilon(1e-13));
  const Symbol gc = make_gaussian(Vec3(0.5, -0.3, 0.8), 0.6, 2.0);
  const GridInverseFT grid(gc, 64);
  std::mt19937_64 rng(5);
  const double scale0 = std::abs(gc.ift().value(Vec3::Zero()));
  for (int i = 0; i < 20; ++i) {
    const Vec3 p = random_point(rng, Vec3::Zero(), 5.0);
    const cplx v = gc.ift().value(p);
    CHECK(std::abs(v - grid.value(p)) < 1e-6 * scale0);
    // conjugate symmetry of real symbols
    CHECK(std::abs(gc.ift().value(-p) - std::conj(v)) < 1e-10 * scale0);
  }
  // grid on_grid equals pointwise evaluation
  std::vector<cplx> lat;
  grid.on_grid(0.7, 3, lat);
  CHECK(std::abs(lat[(1 * 7 + 5) * 7 + 2] - grid.value(Vec3(-1.4, 1.4, -0.7))) < 1e-12);
  std::vector<cplx> lat2;
  gc.ift().on_grid(0.7, 3, lat2);
  CHECK(std::abs(lat2[(1 * 7 + 5) * 7 + 2] - gc.ift().value(Vec3(-1.4, 1.4, -0.7))) < 1e-14);
  // round trip
  const Vec3 xi(0.6, -0.1, 0.9);
  CHECK(std::abs(forward_ft(gc.ift(), xi, 12.0, 0.25) - gc.at(xi)) < 1e-6);
}

TEST_CASE("radial transform against reference quadrature") {
  auto f = [](double rho) {
    const double b = standard_bump(rho / 0.7);
    return b * b;
  };
  const RadialTransform T(f, 0.7, 0.07, 60.0);
  for (double R : {0.0, 0.3, 1.7, 5.2, 13.0, 40.0}) {
    const double ref = radial_transform_reference(f, 0.7, R);
    CHECK(std::abs(T(R) - ref) < 1e-6 * std::abs(T.at_zero()));
  }
  // plateau small ball: radial provider vs grid recomputation
  const Symbol a = make_small_ball(0.2, kXi0, 0.25);
  const GridInverseFT grid(a, 64);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 10; ++i) {
    const Vec3 p = random_point(rng, Vec3::Zero(), 5.0);
    CHECK(std::abs(a.ift().value(p) - grid.value(p)) < 1e-6 * std::abs(a.ift().value(Vec3::Zero())));
  }
}

TEST_CASE("linearity of sums and products of Gaussians") {
  const Symbol a = make_gaussian(Vec3(0.1, 0, 0), 0.5), b = make_gaussian(Vec3(0, 0.2, -0.1), 0.3, 0.5);
  const Symbol s = add(a, scale(b, 2.0));
  const Vec3 x(0.3, 0.2, -0.4);
  CHECK(std::abs(s.ift().value(x) - a.ift().value(x) - 2.0 * b.ift().value(x)) < 1e-15);
  const Symbol p = multiply(a, b);
  const Vec3 xi(0.05, 0.1, 0.0);
  CHECK(std::abs(p.at(xi) - a.at(xi) * b.at(xi)) < 1e-14);
}

TEST_CASE("class membership estimates") {
  const std::vector<double> hs = {0.2, 0.1, 0.05};
  auto one = [](double) {
    SymbolMeta m;
    return Symbol([](const Vec3&) { return cplx(1.0); }, nullptr, m);
  };
  const ClassReport r1 = estimate_class_membership(one, 0.0, 0.0, hs, 50);
  for (const auto& row : r1.constants)
    for (double c : row) CHECK(c < 1e-6);
  CHECK(r1.pass);
  const double kappa = 0.7, s = 1.5;
  auto sob = [&](double h) { return scale(make_sobolev(h, s, kappa, Taper{}).b, std::pow(h, s)); };
  const ClassReport r2 = estimate_class_membership(sob, s, 1 - kappa, hs, 200);
  CHECK(r2.pass);
  auto ball = [](double h) { return make_small_ball(h, kXi0, 0.3); };
  const ClassReport r3 = estimate_class_membership(ball, 0.0, 0.3, hs, 200);
  CHECK(r3.pass);
  // without the h^{delta |alpha|} normalisation the third-order constants
  // grow like h^{-3 delta}
  const ClassReport r4 = estimate_class_membership(ball, 0.0, 0.0, hs, 200);
  const double slope = std::log(r4.constants[2].back() / r4.constants[0].back()) / std::log(hs[2] / hs[0]);
  CHECK(slope / (-3 * 0.3) >= 0.5);
  CHECK(slope / (-3 * 0.3) <= 2.0);
}
