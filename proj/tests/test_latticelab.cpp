#include <cmath>
#include <set>

#include "doctest.h"
#include "orbitlab/error.hpp"
#include "orbitlab/fit.hpp"
#include "orbitlab/latticelab.hpp"
#include "orbitlab/orbits.hpp"

using namespace orbitlab;

namespace {

std::vector<IntMatrix> brute_force(int M, double T) {
  std::vector<IntMatrix> out;
  for (int a = -M; a <= M; ++a)
    for (int b = -M; b <= M; ++b)
      for (int c = -M; c <= M; ++c)
        for (int d = -M; d <= M; ++d) {
          IntMatrix m{a, b, c, d};
          if (a * d - b * c == 1 && m.norm_sq() <= T * T) out.push_back(m);
        }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("lattice enumeration") {
  const auto small = enumerate_lattice_int(1.5);
  REQUIRE(small.size() == 4);
  const std::set<std::tuple<long, long, long, long>> want{{1, 0, 0, 1}, {-1, 0, 0, -1}, {0, 1, -1, 0}, {0, -1, 1, 0}};
  for (const auto& m : small) CHECK(want.count({m.a, m.b, m.c, m.d}) == 1);

  CHECK(enumerate_lattice_int(3.0) == brute_force(3, 3.0));
  CHECK(enumerate_lattice_int(4.2) == brute_force(5, 4.2));

  // closed under inverse and negation
  const auto l = enumerate_lattice_int(12.0);
  std::set<std::tuple<long, long, long, long>> s;
  for (const auto& m : l) s.insert({m.a, m.b, m.c, m.d});
  CHECK(s.size() == l.size());
  for (const auto& m : l) {
    CHECK(s.count({m.d, -m.b, -m.c, m.a}) == 1);
    CHECK(s.count({-m.a, -m.b, -m.c, -m.d}) == 1);
  }
  CHECK(enumerate_lattice(3.0).size() == brute_force(3, 3.0).size());

  std::vector<double> T, n;
  for (double t : {50.0, 100.0, 200.0, 400.0, 800.0}) {
    T.push_back(t);
    n.push_back(static_cast<double>(count_lattice(t)));
  }
  CHECK(std::abs(fit_power_law(T, n).slope - 2.0) < 0.1);

  CHECK_THROWS_AS(count_lattice(5001.0), ParameterError);
  CHECK_THROWS_AS(count_lattice(-1.0), ParameterError);
}

TEST_CASE("packing constant") {
  PsiSpec psi;
  psi.radius = 0.3;
  const PackingReport p = packing_constant(psi, 9);
  // a single translate fits in the support
  CHECK(p.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.max_terms == 1);
  PsiSpec wide = psi;
  wide.radius = 1.5;
  const PackingReport q = packing_constant(wide, 9);
  CHECK(q.value > p.value);
  CHECK(q.max_terms > 1);
  CHECK(std::isfinite(q.value));
  PsiSpec tripled = wide;
  tripled.amplitude = 3.0;
  CHECK(packing_constant(tripled, 9).value == doctest::Approx(3.0 * q.value).epsilon(1e-12));
  PsiSpec far = psi;
  far.radius = 9.0;
  far.center = GroupMatrix::diag(2.0);
  CHECK_THROWS_AS(packing_constant(far), ParameterError);
}

TEST_CASE("tube counts") {
  TubeSpec s;
  s.rho = 1e-3;
  s.T = 1.5;
  const TubeCount c = tube_count(s);
  // +-1 both fix xi0 in the coadjoint picture
  CHECK(c.pm_min == 2);
  CHECK(c.pm_max == 2);
  CHECK(c.mod_center_min == 1);
  CHECK(tube_margin(s, GroupMatrix()) > 0.0);
  CHECK(tube_margin(s, GroupMatrix(0, 1, -1, 0)) < 0.0);

  TubeSpec t;
  t.g = generic_base_point();
  t.rho = 0.1;
  long prev = -1;
  for (double T : {10.0, 20.0, 30.0, 40.0}) {
    t.T = T;
    const TubeCount k = tube_count(t);
    CHECK(k.pm_min >= prev);
    CHECK(k.pm_min % 2 == 0);
    prev = k.pm_min;
  }
  CHECK(prev > 0);
  t.T = 30.0;
  long prev_rho = -1;
  for (double rho : {0.05, 0.1, 0.2}) {
    t.rho = rho;
    const long k = tube_count(t).pm_min;
    CHECK(k >= prev_rho);
    prev_rho = k;
  }

  // norm obstruction
  TubeSpec f;
  f.g = GroupMatrix::diag(100.0);
  f.rho = 1e-3;
  f.T = 50.0;
  CHECK(tube_count(f).pm_max == 0);

  // conjugation by the rotation in SL(2,Z)
  const GroupMatrix k(0, 1, -1, 0);
  TubeSpec a;
  a.g = generic_base_point();
  a.rho = 0.15;
  a.T = 25.0;
  TubeSpec b = a;
  b.xi0 = apply_coadjoint(k, a.xi0);
  b.g = k * a.g * k.inverse();
  const TubeCount ca = tube_count(a), cb = tube_count(b);
  CHECK(ca.pm_min == cb.pm_min);
  CHECK(ca.pm_max == cb.pm_max);

  TubeSpec bad;
  bad.rho = 0.7;
  CHECK_THROWS_AS(tube_count(bad), ParameterError);
  bad.rho = 0.1;
  bad.xi0 = Covector(1.0, 0.0, 0.0);
  CHECK_THROWS_AS(tube_count(bad), ParameterError);
}

TEST_CASE("volumes") {
  const double v16 = fundamental_volume(16), v32 = fundamental_volume(32);
  CHECK(std::abs(v16 - v32) / v32 < 5e-3);
  CHECK(v32 == doctest::Approx(M_PI * M_PI / (3.0 * std::sqrt(2.0))).epsilon(1e-10));
  const double b1 = ball_volume(0.1), b2 = ball_volume(0.2);
  CHECK(b1 == doctest::Approx(4.0 * M_PI / 3.0 * 1e-3).epsilon(0.02));
  CHECK(std::abs(b2 / b1 / 8.0 - 1.0) < 0.15);
  CHECK(ball_volume(0.2, 32) == doctest::Approx(b2).epsilon(1e-6));
  CHECK(stabilizer_volume(10.0) == doctest::Approx(2.0 * std::sqrt(98.0)));
  CHECK(stabilizer_volume(1.0) == 0.0);
}

TEST_CASE("horocycle returns") {
  const CountReport r = ratner_ratio(nilpotent_regular_point(), 0.3, generic_base_point(), {250, 500, 1000});
  REQUIRE(r.rows.size() == 3);
  for (size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].count_min >= r.rows[i - 1].count_min);
  for (const auto& row : r.rows) CHECK(std::abs(row.ratio_min - 1.0) < 0.25);
  CHECK(r.vol_X_change < 5e-3);
  CHECK(r.csv().rfind("T,count_min,count_max,vol_S_T,vol_B,vol_X,ratio_min,ratio_max\n", 0) == 0);
  // the closed horocycle through the identity keeps returning to B
  const CountReport c = ratner_ratio(nilpotent_regular_point(), 0.3, GroupMatrix(), {250, 500});
  CHECK(c.rows[1].ratio_min == doctest::Approx(c.rows[0].ratio_min).epsilon(1e-3));
  CHECK(c.rows[0].ratio_min > 5.0);
  CHECK_THROWS_AS(ratner_ratio(nilpotent_regular_point(), 0.0, GroupMatrix(), {250}), ParameterError);
}
