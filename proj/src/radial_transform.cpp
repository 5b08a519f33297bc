#include "orbitlab/radial_transform.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "orbitlab/error.hpp"
#include "orbitlab/quadrature.hpp"

namespace orbitlab {

namespace {
std::mutex planner_mutex;
}

RadialTransform::RadialTransform(const std::function<double(double)>& f, double support, double feature,
                                 double x_max, int pad) {
  if (!(support > 0.0) || !(feature > 0.0)) throw ParameterError("radial transform needs positive scales");
  // Step resolves the profile and reaches x_max with margin.
  double drho = std::min(feature / 16.0, M_PI / (1.5 * std::max(x_max, 1.0)));
  const int n_support = static_cast<int>(std::ceil(support / drho));
  int N = std::max(64, pad * n_support);
  if (N > (1 << 24)) throw NumericalError("radial transform table too large");
  std::vector<double> g(N - 1);
  double zero = 0.0;
  for (int j = 1; j < N; ++j) {
    const double rho = j * drho;
    const double v = rho < support ? f(rho) : 0.0;
    g[j - 1] = v * rho;
    zero += v * rho * rho;
  }
  std::vector<double> out(N - 1);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    plan = fftw_plan_r2r_1d(N - 1, g.data(), out.data(), FFTW_RODFT00, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(plan);
  }
  dR_ = M_PI / (N * drho);
  table_.resize(N);
  table_[0] = zero * drho / (2.0 * M_PI * M_PI);
  for (int k = 1; k < N; ++k) {
    const double R = k * dR_;
    table_[k] = (0.5 * drho * out[k - 1]) / (2.0 * M_PI * M_PI * R);
  }
  // Interpolation needs two points of slack at the top.
  R_max_ = (N - 3) * dR_;
}

double RadialTransform::operator()(double R) const {
  R = std::abs(R);
  if (R > R_max_) throw NumericalError("radial transform evaluated beyond its table");
  const double t = R / dR_;
  int i = static_cast<int>(std::floor(t));
  const double u = t - i;
  auto at = [&](int k) { return table_[std::abs(k)]; };  // F is even in R
  const double fm = at(i - 1), f0 = at(i), f1 = at(i + 1), f2 = at(i + 2);
  return -u * (u - 1) * (u - 2) / 6.0 * fm + (u + 1) * (u - 1) * (u - 2) / 2.0 * f0 -
         (u + 1) * u * (u - 2) / 2.0 * f1 + (u + 1) * u * (u - 1) / 6.0 * f2;
}

double RadialTransform::decay_radius(double tol) const {
  double mx = 0.0;
  for (double v : table_) mx = std::max(mx, std::abs(v));
  for (int k = static_cast<int>(table_.size()) - 3; k > 0; --k)
    if (std::abs(table_[k]) > tol * mx) return std::min(R_max_, (k + 1) * dR_);
  return dR_;
}

double radial_transform_reference(const std::function<double(double)>& f, double support, double R,
                                  int panels) {
  const auto& gl = gauss_legendre(16);
  double sum = 0.0;
  const double h = support / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = p * h;
    for (size_t i = 0; i < gl.nodes.size(); ++i) {
      const double rho = a + 0.5 * h * (gl.nodes[i] + 1.0);
      const double kern = R == 0.0 ? rho * rho : rho * std::sin(rho * R) / R;
      sum += 0.5 * h * gl.weights[i] * f(rho) * kern;
    }
  }
  return sum / (2.0 * M_PI * M_PI);
}

}  // namespace orbitlab
