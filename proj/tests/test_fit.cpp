#include <cmath>

#include "doctest.h"
#include "orbitlab/error.hpp"
#include "orbitlab/fit.hpp"

using namespace orbitlab;

TEST_CASE("exact power law") {
  std::vector<double> x, y;
  for (double h : {0.2, 0.1, 0.05, 0.025}) {
    x.push_back(h);
    y.push_back(3.0 * std::pow(h, -0.7));
  }
  const PowerFit f = fit_power_law(x, y);
  CHECK(f.slope == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.rms < 1e-12);
  CHECK(f.slope_err < 1e-12);
  CHECK(f.points == 4);
}

TEST_CASE("noisy data widens the band") {
  const std::vector<double> x{1, 2, 4, 8, 16};
  const std::vector<double> y{1.0, 2.2, 3.7, 8.5, 15.0};
  const PowerFit f = fit_power_law(x, y);
  CHECK(f.slope == doctest::Approx(0.98).epsilon(0.05));
  CHECK(f.slope_err > 0.0);
  CHECK(f.lower() < f.slope);
  CHECK(f.upper() > f.slope);
  // two points: exact line, no error estimate
  const PowerFit g = fit_power_law({1, 4}, {2, 8});
  CHECK(g.slope == doctest::Approx(1.0));
  CHECK(g.slope_err == 0.0);
}

TEST_CASE("fit errors") {
  CHECK_THROWS_AS(fit_power_law({1.0}, {1.0}), ParameterError);
  CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {1.0, -1.0}), ParameterError);
  CHECK_THROWS_AS(fit_power_law({1.0, 1.0}, {1.0, 2.0}), ParameterError);
  CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {1.0}), ParameterError);
}

TEST_CASE("hbar exponents") {
  const std::vector<double> h{0.2, 0.1, 0.05, 0.025};
  std::vector<double> sq, wobble, flat;
  for (double x : h) {
    sq.push_back(x * x);
    wobble.push_back(x * x * (1.0 + 0.1 * std::sin(1.0 / x)));
    flat.push_back(0.3);
  }
  CHECK(std::abs(fit_exponent(h, sq).slope - 2.0) < 1e-12);
  const PowerFit w = fit_exponent(h, wobble);
  CHECK(std::abs(w.slope - 2.0) < 0.1);
  CHECK(w.rms > 0.0);
  CHECK(std::abs(fit_exponent(h, flat).slope) < 1e-12);
  CHECK_THROWS_AS(fit_exponent({0.2, 0.1}, {1.0, 2.0}), ParameterError);
  CHECK_THROWS_AS(fit_exponent(h, {1.0, 0.0, 1.0, 1.0}), ParameterError);
}
