#include <cmath>
#include <random>

#include "doctest.h"
#include "orbitlab/error.hpp"
#include "orbitlab/repn_ps.hpp"

using namespace orbitlab;

namespace {

CMatrix interior(const CMatrix& m, const PrincipalSeries& pi) {
  return m.block(pi.interior_begin(), pi.interior_begin(), pi.interior_dim(), pi.interior_dim());
}

const PrincipalSeries kPi(1.3, 48);

}  // namespace

TEST_CASE("pi of identity and rotations") {
  const CMatrix id = pi_of_g(kPi, GroupMatrix()).entries;
  CHECK((id - CMatrix::Identity(kPi.dim(), kPi.dim())).norm() < 1e-12);
  const double th = 0.731;
  const CMatrix rot = pi_of_g(kPi, GroupMatrix::rotation(th)).entries;
  CMatrix expect = CMatrix::Zero(kPi.dim(), kPi.dim());
  for (int i = 0; i < kPi.dim(); ++i) expect(i, i) = std::polar(1.0, kPi.weight_of(i) * th);
  CHECK((rot - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pi is a unitary homomorphism on the interior block") {
  // mild elements: the interior columns of pi(g2) stay inside |k| <= K_max
  const GroupMatrix g1 = exp_map(AlgebraVector(0.12, -0.05, 0.1));
  const GroupMatrix g2 = exp_map(AlgebraVector(-0.1, 0.08, 0.03)) * GroupMatrix::rotation(0.3);
  const CMatrix a = pi_of_g(kPi, g1).entries, b = pi_of_g(kPi, g2).entries;
  const CMatrix ab = pi_of_g(kPi, g1 * g2).entries;
  CHECK((interior(a * b, kPi) - interior(ab, kPi)).norm() < 1e-6);
  // ||g|| <= 3; rows are kept up to the full spread of the interior columns
  const GroupMatrix g3 = GroupMatrix::diag(1.9) * GroupMatrix::rotation(0.4);
  const GroupMatrix g4 = GroupMatrix(2.0, 1.0, 0.4, 0.7);
  for (const GroupMatrix& g : {g1, g2, g3, g4}) {
    CHECK(g.matrix().norm() <= 3.0);
    const CMatrix p = pi_of_g_columns(kPi, g, 512);
    const CMatrix u = (p.adjoint() * p);
    CHECK((interior(u, kPi) - CMatrix::Identity(kPi.interior_dim(), kPi.interior_dim())).norm() < 1e-6);
  }
}

TEST_CASE("unitarity defect shrinks as K_max doubles") {
  // fixed block |k| <= 8, square truncation growing
  const GroupMatrix g = GroupMatrix::diag(1.6);
  double prev = 1.0;
  for (int K : {16, 32, 64, 128}) {
    const PrincipalSeries pi(0.8, K);
    const CMatrix p = pi_of_g(pi, g).entries;
    const int b = pi.index_of(-8);
    const double d = ((p.adjoint() * p).block(b, b, 9, 9) - CMatrix::Identity(9, 9)).norm();
    CHECK(d <= prev);
    prev = d;
  }
  CHECK(prev < 1e-8);
}

TEST_CASE("pi of g rejects huge elements") {
  CHECK_THROWS_AS(pi_of_g(kPi, GroupMatrix::diag(2000.0)), DomainError);
  const PrincipalSeries pi(1.0, 16);
  CircleAccumulator acc(pi, 16, 18);
  acc.add(GroupMatrix::diag(60.0), 1.0);
  CHECK_THROWS_AS(acc.finish(1e-8, 8), TruncationError);
  // adaptive sampling handles the same element
  const CMatrix p = pi_of_g(pi, GroupMatrix::diag(6.0)).entries;
  CHECK(std::isfinite(p.norm()));
}

TEST_CASE("closed-form d pi agrees with differencing") {
  const PrincipalSeries pi(1.3, 32);
  for (const AlgebraVector& x : {kH, kE, kF, AlgebraVector(0.3, -0.7, 0.2)}) {
    const CMatrix c = algebra_action(pi, x).entries;
    const CMatrix n = algebra_action_numeric(pi, x).entries;
    CHECK((interior(c, pi) - interior(n, pi)).cwiseAbs().maxCoeff() < 1e-6);
  }
  const CMatrix k = algebra_action(pi, kE - kF).entries;
  for (int i = 0; i < pi.dim(); ++i) CHECK(k(i, i) == cplx(0, pi.weight_of(i)));
}

TEST_CASE("bracket relations and Casimir") {
  const PrincipalSeries pi(1.3, 40);
  const AlgebraVector xs[3] = {kH, kE, AlgebraVector(0.2, -0.5, 0.9)};
  for (const auto& x : xs)
    for (const auto& y : xs) {
      const CMatrix a = algebra_action(pi, x).entries, b = algebra_action(pi, y).entries;
      const CMatrix br = algebra_action(pi, bracket(x, y)).entries;
      CHECK((interior(a * b - b * a, pi) - interior(br, pi)).norm() < 1e-5);
    }
  const Mat3 Binv = basis_to_ortho().inverse();
  CMatrix cas = CMatrix::Zero(pi.dim(), pi.dim());
  for (int i = 0; i < 3; ++i) {
    const CMatrix d = algebra_action(pi, AlgebraVector(Vec3(Binv.col(i)))).entries;
    cas += (i < 2 ? 1.0 : -1.0) * d * d;
  }
  const CMatrix ci = interior(cas, pi);
  CHECK((ci - casimir_value(1.3) * CMatrix::Identity(ci.rows(), ci.cols())).norm() < 1e-6);
  CHECK(casimir_value(1.3) == doctest::Approx(-(1 + 4 * 1.69) / 2));
}

TEST_CASE("Delta is diagonal, Hermitian, positive and K-invariant") {
  const PrincipalSeries pi(1.3, 40);
  const OperatorMatrix D = delta_matrix(pi);
  CHECK(D.hermiticity_defect() < 1e-8);
  for (int i = 0; i < pi.dim(); ++i) {
    CHECK(D.entries(i, i).real() == doctest::Approx(delta_eigenvalue(1.3, pi.weight_of(i))));
    CHECK(D.entries(i, i).real() >= 1.0);
  }
  CHECK(D.entries(pi.index_of(0), pi.index_of(0)).real() == doctest::Approx(1.5 + 2 * 1.69));
  const CMatrix k = pi_of_g(pi, GroupMatrix::rotation(0.9)).entries;
  CHECK((interior(k * D.entries - D.entries * k, pi)).norm() < 1e-6);
  // growth exponent 2 in k
  const double g = std::log((delta_eigenvalue(1.3, 40) - delta_eigenvalue(1.3, 0)) /
                            (delta_eigenvalue(1.3, 20) - delta_eigenvalue(1.3, 0))) / std::log(2.0);
  CHECK(g == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("Sobolev pairing") {
  const PrincipalSeries pi(1.3, 24);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  auto rnd = [&] {
    KTypeVector v;
    v.K_max = 24;
    v.coeffs = CVector(pi.dim());
    for (int i = 0; i < pi.dim(); ++i) v.coeffs[i] = cplx(n(rng), n(rng));
    return v;
  };
  const KTypeVector v = rnd(), u = rnd();
  CHECK(std::abs(sobolev_pairing(pi, v, u, 0) - u.coeffs.dot(v.coeffs)) < 1e-10);
  const KTypeVector e0 = KTypeVector::basis(24, 0);
  CHECK(sobolev_pairing(pi, e0, e0, 1).real() == doctest::Approx(delta_eigenvalue(1.3, 0)));
  for (int s = 1; s <= 3; ++s)
    CHECK(std::abs(sobolev_pairing(pi, v, u, 0)) <= sobolev_norm(pi, v, s) * sobolev_norm(pi, u, -s) * (1 + 1e-12));
  CHECK_THROWS_AS(sobolev_pairing(pi, v, u, 7), ParameterError);
}
