#pragma once

// Least-squares power laws y ~ C x^slope on log-log data.

#include <vector>

#include <json.hpp>

namespace orbitlab {

struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;  // log C
  double rms = 0.0;        // rms of the log residuals
  double slope_err = 0.0;  // standard error of the slope (0 for two points)
  int points = 0;
  // slope - 2 slope_err, the pessimistic end of the band for "slope >= t"
  double lower() const { return slope - 2.0 * slope_err; }
  double upper() const { return slope + 2.0 * slope_err; }
  nlohmann::json to_json() const;
};

// Throws ParameterError for fewer than two points or non-positive data.
PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

// Exponent of an hbar series: at least three points, slope of the log-log fit
// with its rms residual.
PowerFit fit_exponent(const std::vector<double>& hbar, const std::vector<double>& values);

}  // namespace orbitlab
