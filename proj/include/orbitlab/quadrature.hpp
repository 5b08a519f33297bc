#pragma once

#include <vector>

namespace orbitlab {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Cached n-point Gauss-Legendre rule.
const GaussRule& gauss_legendre(int n);

// Fixed-order pairwise summation; deterministic and accurate.
double pairwise_sum(const double* v, long n);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), static_cast<long>(v.size())); }

// C-infinity step: 1 for t <= 0, 0 for t >= 1, smooth exponential joint between.
double smooth_step_down(double t);
// Plateau: 1 on |y| <= r1, 0 on |y| >= r2.
inline double plateau(double y, double r1, double r2) { return smooth_step_down((y - r1) / (r2 - r1)); }

}  // namespace orbitlab
