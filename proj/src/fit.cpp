#include "orbitlab/fit.hpp"

#include <cmath>

#include "orbitlab/error.hpp"

namespace orbitlab {

nlohmann::json PowerFit::to_json() const {
  return {{"slope", slope}, {"intercept", intercept}, {"rms", rms}, {"slope_err", slope_err}, {"points", points}};
}

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ParameterError("fit: x and y differ in length");
  const int n = static_cast<int>(x.size());
  if (n < 2) throw ParameterError("fit needs at least two points");
  std::vector<double> lx(n), ly(n);
  for (int i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ParameterError("fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw ParameterError("fit needs at least two distinct x");
  PowerFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = ly[i] - f.intercept - f.slope * lx[i];
    ss += e * e;
  }
  f.rms = std::sqrt(ss / n);
  if (n > 2) f.slope_err = std::sqrt(ss / (n - 2) / sxx);
  return f;
}

PowerFit fit_exponent(const std::vector<double>& hbar, const std::vector<double>& values) {
  if (hbar.size() < 3) throw ParameterError("exponent fit needs at least three points");
  for (double v : values)
    if (!(v > 0.0)) throw ParameterError("exponent fit needs positive values");
  return fit_power_law(hbar, values);
}

}  // namespace orbitlab
