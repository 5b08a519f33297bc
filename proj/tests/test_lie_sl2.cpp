#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

#include "doctest.h"
#include "orbitlab/error.hpp"
#include "orbitlab/lie_sl2.hpp"

using namespace orbitlab;

namespace {

AlgebraVector random_x(std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0, 1);
  Vec3 v(n(rng), n(rng), n(rng));
  v *= radius * std::cbrt(u(rng)) / v.norm();
  return AlgebraVector::from_ortho(v);
}

GroupMatrix random_g(std::mt19937_64& rng, double radius = 1.5) {
  return exp_map(random_x(rng, radius)) * GroupMatrix::rotation(std::uniform_real_distribution<double>(0, 6.3)(rng));
}

Mat2 taylor_exp(const Mat2& x, int terms) {
  Mat2 sum = Mat2::Identity(), term = Mat2::Identity();
  for (int k = 1; k < terms; ++k) {
    term = term * x / double(k);
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("coordinates round trip and pairing is the identity on dual bases") {
  const AlgebraVector x(0.3, -1.2, 2.5);
  CHECK((AlgebraVector::from_matrix(x.matrix()).coords() - x.coords()).norm() == 0.0);
  CHECK((AlgebraVector::from_ortho(x.ortho()).coords() - x.coords()).norm() < 1e-15);
  const AlgebraVector basis[3] = {kH, kE, kF};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Vec3 e = Vec3::Zero();
      e[j] = 1;
      CHECK(pairing(basis[i], Covector(e)) == doctest::Approx(i == j ? 1.0 : 0.0));
    }
  // trace-form realisation of the pairing
  const Covector xi(0.7, -0.4, 1.9);
  CHECK((x.matrix() * xi.matrix()).trace() == doctest::Approx(pairing(x, xi)).epsilon(1e-14));
  CHECK(x.ortho().dot(xi.ortho()) == doctest::Approx(pairing(x, xi)).epsilon(1e-14));
}

TEST_CASE("orthonormal basis is orthonormal under tr(x y^T)") {
  const Mat3 B = basis_to_ortho();
  const Mat3 Binv = B.inverse();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Mat2 xi = AlgebraVector(Vec3(Binv.col(i))).matrix();
      const Mat2 xj = AlgebraVector(Vec3(Binv.col(j))).matrix();
      CHECK((xi * xj.transpose()).trace() == doctest::Approx(i == j ? 1.0 : 0.0));
    }
}

TEST_CASE("exp_map against closed forms and Taylor series") {
  CHECK((exp_map(AlgebraVector()).matrix() - Mat2::Identity()).norm() == 0.0);
  const Mat2 e = exp_map(kH * 0.5).matrix();
  CHECK(e(0, 0) == doctest::Approx(std::exp(0.5)).epsilon(1e-15));
  CHECK(e(1, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const AlgebraVector x = random_x(rng, 1.0);
    const Mat2 ex = exp_map(x).matrix();
    CHECK((ex - taylor_exp(x.matrix(), 20)).norm() < 1e-12);
    CHECK(std::abs(ex.determinant() - 1.0) < 1e-12);
  }
  // elliptic and nilpotent directions
  const Mat2 k = exp_map((kE - kF) * 0.8).matrix();
  CHECK((k - GroupMatrix::rotation(0.8).matrix()).norm() < 1e-14);
  CHECK((exp_map(kE * 3.0).matrix() - GroupMatrix::unipotent(3.0).matrix()).norm() < 1e-14);
}

TEST_CASE("log_map inverts exp_map") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 100; ++i) {
    const AlgebraVector x = random_x(rng, 2.0);
    const GroupMatrix g = exp_map(x);
    CHECK((exp_map(log_map(g)).matrix() - g.matrix()).norm() < 1e-10);
  }
  CHECK_THROWS_AS(log_map(GroupMatrix(-1, 0.5, 0, -1)), DomainError);
}

TEST_CASE("adjoint is a homomorphism and matches exp(ad x)") {
  CHECK((adjoint(GroupMatrix()) - Mat3::Identity()).norm() < 1e-15);
  const Mat3 a = adjoint(GroupMatrix::diag(1.7));
  CHECK(apply_adjoint(GroupMatrix::diag(1.7), kE).coords()[1] == doctest::Approx(1.7 * 1.7));
  CHECK(a(1, 1) == doctest::Approx(1.7 * 1.7));
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const GroupMatrix g1 = random_g(rng), g2 = random_g(rng);
    CHECK((adjoint(g1 * g2) - adjoint(g1) * adjoint(g2)).norm() < 1e-10 * adjoint(g1 * g2).norm());
    CHECK(adjoint(g1).determinant() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK((coadjoint(g1 * g2) - coadjoint(g1) * coadjoint(g2)).norm() < 1e-10 * coadjoint(g1 * g2).norm());
    const AlgebraVector x = random_x(rng, 2.0);
    const Mat3 ead = ad_matrix(x).exp();
    CHECK((adjoint(exp_map(x)) - ead).norm() < 1e-10 * ead.norm());
  }
}

TEST_CASE("coadjoint preserves the pairing and the Casimir") {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> n;
  for (int i = 0; i < 100; ++i) {
    const GroupMatrix g = random_g(rng);
    const AlgebraVector x(n(rng), n(rng), n(rng));
    const Covector xi(n(rng), n(rng), n(rng));
    const double p = pairing(x, xi);
    CHECK(pairing(apply_adjoint(g, x), apply_coadjoint(g, xi)) == doctest::Approx(p).epsilon(1e-10).scale(1.0));
    CHECK(apply_coadjoint(g, xi).casimir() == doctest::Approx(xi.casimir()).epsilon(1e-9).scale(1.0));
  }
  // diag(l, 1/l) acts on the eta_E slot by l^{-2}
  const Covector c = apply_coadjoint(GroupMatrix::diag(2.0), Covector(0, 1, 0));
  CHECK(c.coords()[1] == doctest::Approx(0.25));
  CHECK(Covector(0, 0, 1).casimir() == 0.0);
  CHECK(Covector::from_ortho(Vec3(kSqrt2, 0, 0)).casimir() == doctest::Approx(1.0));
}

TEST_CASE("haar_jacobian") {
  CHECK(haar_jacobian(AlgebraVector()) == 1.0);
  for (double t : {0.1, 0.5, 0.9}) {
    const double closed = (1 - std::exp(-2 * t)) * (1 - std::exp(2 * t)) / (2 * t * (-2 * t));
    CHECK(haar_jacobian(kH * t) == doctest::Approx(closed).epsilon(1e-12));
  }
  std::mt19937_64 rng(15);
  for (int i = 0; i < 100; ++i) CHECK(haar_jacobian(random_x(rng, 2.0)) > 0.0);
  CHECK_THROWS_AS(haar_jacobian(kH * 5.0), DomainError);
  // j is the density of Haar measure: left translation by a small element
  // changes coordinates with Jacobian j(y)/j(x).
  const AlgebraVector x(0.2, 0.4, -0.3);
  const GroupMatrix h = exp_map(AlgebraVector(0.01, -0.02, 0.015));
  auto f = [&](const Vec3& v) { return log_map(h * exp_map(AlgebraVector::from_ortho(v))).ortho(); };
  Mat3 J;
  const double eps = 1e-5;
  for (int i = 0; i < 3; ++i) {
    Vec3 e = Vec3::Zero();
    e[i] = eps;
    J.col(i) = (f(x.ortho() + e) - f(x.ortho() - e)) / (2 * eps);
  }
  const AlgebraVector y = AlgebraVector::from_ortho(f(x.ortho()));
  CHECK(J.determinant() * haar_jacobian(y) == doctest::Approx(haar_jacobian(x)).epsilon(1e-7));
}

TEST_CASE("norms") {
  const GroupNorms n0 = norms(GroupMatrix());
  CHECK(n0.frobenius == doctest::Approx(kSqrt2));
  CHECK(n0.ad == doctest::Approx(1.0));
  CHECK(n0.coad == doctest::Approx(1.0));
  CHECK(norms(GroupMatrix::diag(3.0)).ad == doctest::Approx(9.0));
  std::mt19937_64 rng(16);
  for (int i = 0; i < 100; ++i) {
    const GroupMatrix g = random_g(rng, 2.0);
    CHECK(norms(g).ad * norms(g.inverse()).ad >= 1.0 - 1e-12);
  }
  CHECK_THROWS_AS(GroupMatrix(1, 1, 1, 1), DomainError);
}
