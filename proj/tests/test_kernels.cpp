#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "orbitlab/kernels.hpp"

using namespace orbitlab::kernels;

namespace {

struct Case {
  std::vector<double> zr, zi, sr, si;
};

Case make_case(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1), ph(0, 6.283185307179586);
  Case c;
  for (int i = 0; i < n; ++i) {
    c.zr.push_back(u(rng));
    c.zi.push_back(u(rng));
    const double p = ph(rng);
    c.sr.push_back(std::cos(p));
    c.si.push_back(std::sin(p));
  }
  return c;
}

void run(AccumulateFn fn, const Case& c, int cols, std::vector<double>& ar, std::vector<double>& ai) {
  const int n = static_cast<int>(c.zr.size());
  ar.assign(static_cast<size_t>(n) * cols, 0.5);
  ai.assign(static_cast<size_t>(n) * cols, -0.25);
  GeometricBatch b{c.zr.data(), c.zi.data(), c.sr.data(), c.si.data(), n};
  fn(b, cols, ar.data(), ai.data());
  fn(b, cols, ar.data(), ai.data());
}

}  // namespace

TEST_CASE("scalar kernel matches an explicit geometric sum") {
  const Case c = make_case(5, 1);
  std::vector<double> ar, ai;
  run(&accumulate_scalar, c, 7, ar, ai);
  for (int m = 0; m < 5; ++m) {
    std::complex<double> z(c.zr[m], c.zi[m]), s(c.sr[m], c.si[m]);
    for (int col = 0; col < 7; ++col) {
      const std::complex<double> expect = std::complex<double>(0.5, -0.25) + 2.0 * z * std::pow(s, col);
      CHECK(ar[col * 5 + m] == doctest::Approx(expect.real()).epsilon(1e-13));
      CHECK(ai[col * 5 + m] == doctest::Approx(expect.imag()).epsilon(1e-13));
    }
  }
}

TEST_CASE("SIMD kernels are bitwise equal to the scalar reference") {
  for (Isa isa : {Isa::Avx2, Isa::Avx512}) {
    if (!isa_supported(isa)) {
      MESSAGE("skipping ", isa_name(isa), ": not supported on this cpu");
      continue;
    }
    for (int n : {1, 3, 4, 7, 8, 9, 16, 33, 640}) {
      const Case c = make_case(n, 100 + n);
      std::vector<double> r0, i0, r1, i1;
      run(&accumulate_scalar, c, 37, r0, i0);
      run(accumulate_for(isa), c, 37, r1, i1);
      CHECK(r0 == r1);
      CHECK(i0 == i1);
    }
  }
}

TEST_CASE("dispatch") {
  CHECK(isa_supported(Isa::Scalar));
  CHECK(isa_supported(best_isa()));
  const Isa before = active_isa();
  set_active_isa(Isa::Scalar);
  CHECK(active_isa() == Isa::Scalar);
  set_active_isa(before);
  CHECK(isa_name(Isa::Avx512) == "avx512");
}
