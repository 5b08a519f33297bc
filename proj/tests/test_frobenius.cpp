#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "orbitlab/bessel.hpp"
#include "orbitlab/error.hpp"
#include "orbitlab/frobenius.hpp"
#include "orbitlab/orbits.hpp"

using namespace orbitlab;

namespace {

const std::string kData = std::string(ORBITLAB_DATA_DIR) + "/maass_even_r13.78.txt";

std::string read_all(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const MaassFormData& maass() {
  static const MaassFormData d = load_maass_data(kData);
  return d;
}

QuantScheme at(double h) {
  QuantScheme s;
  s.hbar = h;
  return s;
}

}  // namespace

TEST_CASE("synthetic functionals") {
  const FunctionalModel I = synthetic_functional(1.5, 11, 512);
  const SobolevEvidence fin = I.evidence(1.0, 1.5);
  CHECK(fin.stable);
  const SobolevEvidence div = I.evidence(1.0, 0.5);
  CHECK(div.norm_full > 1.1 * div.norm_half);
  CHECK_FALSE(div.stable);

  const FunctionalModel J = synthetic_functional(1.5, 12, 512);
  CHECK(J.dual_norm_sq(1.0, 1.5, 512) == doctest::Approx(I.dual_norm_sq(1.0, 1.5, 512)).epsilon(1e-14));
  CHECK(std::abs(I.iota(6) - J.iota(6)) > 1e-6);
  for (int k = 2; k <= 20; k += 2) CHECK(std::abs(I.iota(-k) - std::conj(I.iota(k))) == 0.0);
  CHECK(I.iota(0).imag() == 0.0);
  CHECK(I.iota(3) == cplx(0.0));
  CHECK(I.iota(514) == cplx(0.0));
  CHECK_THROWS_AS(synthetic_functional(1.0, 1, 64), ParameterError);

  const PrincipalSeries pi(1.0, 16);
  const KTypeVector v = KTypeVector::basis(16, 4);
  CHECK(std::abs(I.apply(v) - I.iota(4)) < 1e-15);
  CHECK(std::abs(I.apply(I.vector_for(pi)) - I.dual_norm_sq(1.0, 0.0, 16)) < 1e-10);
}

TEST_CASE("Maass data loads and validates") {
  const MaassFormData& d = maass();
  CHECK(d.parity == "even");
  CHECK(d.N() >= 60);
  CHECK(d.hecke_residual < 1e-5);
  CHECK(d.automorphy_residual < 1e-5);
  CHECK_FALSE(d.source.empty());
  CHECK(std::abs(d.coeff(4) - (d.coeff(2) * d.coeff(2) - 1.0)) < 1e-8);
}

TEST_CASE("Maass data errors") {
  const std::string text = read_all(kData);
  SUBCASE("truncated") {
    const auto cut = text.find("\n12 ");
    REQUIRE(cut != std::string::npos);
    const std::string bad = text.substr(0, cut + 6);
    try {
      parse_maass_data(bad, "trunc");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
  }
  SUBCASE("corrupted coefficient") {
    std::istringstream in(text);
    std::ostringstream out;
    for (std::string line; std::getline(in, line);) {
      if (line.rfind("6 ", 0) == 0) line = "6 0.5";
      out << line << "\n";
    }
    try {
      parse_maass_data(out.str(), "corrupt");
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("(2, 3)") != std::string::npos);
    }
  }
  SUBCASE("duplicate index") {
    CHECK_THROWS_AS(parse_maass_data("r 1.5\nparity even\n1 1\n2 0.5\n2 0.5\n"), ParseError);
  }
  SUBCASE("header") {
    CHECK_THROWS_AS(parse_maass_data("parity even\n1 1\n"), ParseError);
    CHECK_THROWS_AS(parse_maass_data("r 1.5\nparity odd\n1 1\n"), ParseError);
    CHECK_THROWS_AS(load_maass_data("/nonexistent/maass.txt"), ParseError);
  }
}

TEST_CASE("Maass functional values") {
  const MaassFormData& d = maass();
  const PrincipalSeries pi(d.r, 64);
  MaassFunctionalInfo info;
  const FunctionalModel I = functional_from_maass(d, pi, 128, &info);
  double direct = 0.0;
  for (int n = 1; n <= 25; ++n) direct += 2.0 * d.coeff(n) * bessel_K_imag_order(d.r, 2.0 * M_PI * n, true);
  CHECK(std::abs(I.iota(0) - direct) < 1e-10);
  CHECK(info.worst_oracle < 1e-4);
  CHECK(info.parity_defect < 1e-10);
  CHECK(info.miller_change < 1e-10);
  // z = i is fixed by S, a rotation by pi/2
  for (int k = 2; k <= 30; k += 4) CHECK(std::abs(I.iota(k)) < 1e-10 * std::abs(I.iota(0)));
  CHECK(std::abs(I.iota(4)) > 0.1);
  CHECK(functional_from_maass(d, pi, 256).evidence(d.r, 1.5).stable);
  CHECK_THROWS_AS(functional_from_maass(d, PrincipalSeries(d.r + 1e-6, 64), 64), ParameterError);
  CHECK_THROWS_AS(functional_from_maass(d, pi, 4000), TruncationError);
  CHECK_THROWS_AS(functional_from_maass(d, pi, 800), TruncationError);
  CHECK(functional_from_maass(d, pi, 640).evidence(d.r, 1.1).stable);
}

TEST_CASE("E_hbar basics") {
  const double h = 0.1;
  const PrincipalSeries pi(1.0, 64);
  const FunctionalModel I = synthetic_functional(1.5, 5, 256);
  const Symbol a = make_gaussian(Vec3(0.0, 1.0, 1.0), 0.5);
  EhOptions fast;
  fast.doubling = EhOptions::Doubling::Off;
  fast.symmetric = false;
  CHECK(eval_Eh(make_zero(), I, pi, at(h), fast).value == 0.0);

  const EhReport e = eval_Eh(a, I, pi, at(h));
  CHECK(e.value > 0.0);
  CHECK(std::abs(e.imag) < 1e-8 * e.value);
  CHECK(e.truncation_change < 0.02);
  CHECK(e.agreement < 0.05);
  const EhReport e3 = eval_Eh(scale(a, 3.0), I, pi, at(h), fast);
  CHECK(e3.value == doctest::Approx(3.0 * e.value).epsilon(1e-10));

  // a single nonzero coefficient picks out one matrix element
  CVector c = CVector::Zero(257);
  c(128) = cplx(0.7, 0.2);
  const FunctionalModel one(c, 256, FunctionalModel::Kind::Synthetic, "e0", 2.0);
  QuantScheme sc = at(h);
  sc.interior_columns_only = true;
  const OperatorMatrix M = assemble_op(a, pi, sc);
  const cplx m00 = M.entries(pi.index_of(0), pi.index_of(0));
  CHECK(std::abs(eval_Eh(a, one, pi, at(h), fast).value - std::norm(c(128)) * m00.real()) < 1e-12);

  // the same pairing through the Hermitian form of Op(a)
  HermFormRep Q;
  Q.matrix = M;
  const KTypeVector v = I.vector_for(pi);
  KTypeVector vin = v;
  vin.coeffs.setZero();
  vin.coeffs.segment(pi.interior_begin(), pi.interior_dim()) = v.coeffs.segment(pi.interior_begin(), pi.interior_dim());
  CHECK(std::abs(Q.evaluate(vin).real() - e.value) < 1e-8 * e.value);
}

TEST_CASE("dyadic ratio and functional Sobolev norm") {
  const MaassFormData& d = maass();
  const FunctionalModel I = functional_from_maass(d, PrincipalSeries(d.r, 64), 256);
  const Symbol a = k_average(make_gaussian(Vec3(1.6, 0.0, 1.5), 0.4));
  const DyadicReport rep = dyadic_bound_report(a, I, d.r, {0.1, 0.05}, QuantScheme{});
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.min_ratio > 0.0);
  CHECK(rep.max_ratio < 4.0 * rep.min_ratio);
  for (const auto& row : rep.rows) CHECK(row.truncation_change < 0.02);

  const SobolevNormReport sn = functional_sobolev_norm(I, 1.5, 0.7, d.r, {0.2, 0.1}, QuantScheme{});
  CHECK(sn.ratio < 2.0);
  CHECK_THROWS_AS(functional_sobolev_norm(I, 1.0, 0.7, d.r, {0.2}, QuantScheme{}), ParameterError);
}

TEST_CASE("sup-norm bound") {
  const double h = 0.1;
  const PrincipalSeries pi(1.0, 64);
  const FunctionalModel I = synthetic_functional(1.5, 5, 256);
  const SupNormReport r0 = sup_norm_bound_report(KTypeVector::basis(64, 0), I, 1.5, 0.7, pi, at(h));
  CHECK(std::isfinite(r0.ratio));
  CHECK(r0.I_sq == doctest::Approx(std::norm(I.iota(0))));

  // the sink: near the origin the form is smaller by about |xi0|^s
  const Symbol far = make_gaussian(Vec3(0.0, 1.0 / kSqrt2, 1.0 / kSqrt2), 0.25);
  const Symbol near = make_gaussian(Vec3(0.0, 0.15 / kSqrt2, 0.15 / kSqrt2), 0.05);
  const SupNormReport rf = sup_norm_bound_report(microlocalized_vector(far, I, pi, at(h)), I, 1.5, 0.7, pi, at(h));
  const SupNormReport rn = sup_norm_bound_report(microlocalized_vector(near, I, pi, at(h)), I, 1.5, 0.7, pi, at(h));
  CHECK(rn.H_form < rf.H_form);
  const double predicted = std::pow((std::pow(h, 0.6) + 1.0) / (std::pow(h, 0.6) + 0.0225), 0.75);
  CHECK(rf.H_form / rn.H_form == doctest::Approx(predicted).epsilon(0.5));
  CHECK_THROWS_AS(sup_norm_bound_report(KTypeVector::basis(32, 0), I, 1.5, 0.7, pi, at(h)), ParameterError);
}
