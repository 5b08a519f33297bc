#pragma once

// Contraction of micro-localized symbols toward the origin of the nilcone and
// the resulting bound for E_hbar.

#include <string>
#include <vector>

#include <json.hpp>

#include "orbitlab/fit.hpp"
#include "orbitlab/frobenius.hpp"
#include "orbitlab/lie_sl2.hpp"
#include "orbitlab/symbols.hpp"

namespace orbitlab {

// Dimension d of the problem: half the dimension of the orbits of SL(2,R).
inline constexpr int kHalfOrbitDim = 1;

struct ContractionParams {
  double delta = 0.3;
  double kappa = 0.7;
  double theta = 0.29;
  double eps = 0.01;
  bool coupled = true;  // delta = 1 - kappa

  double s() const { return kHalfOrbitDim + eps; }
  void validate() const;  // ParameterError on any violated range
  nlohmann::json to_json() const;
};

struct ContractionCheck {
  double ratio = 0.0;       // |Ad*(g) xi0| / |xi0|
  double coad_norm = 0.0;   // ||Ad*(g)||
  double ad_norm = 0.0;     // ||Ad(g)||
  double C2 = 0.0;          // ||Ad*(g)|| hbar^theta
  double C3 = 0.0;          // ||Ad(g)|| hbar^{1 - delta - eps}
  nlohmann::json to_json() const;
};

// g = exp(t h) with h from the sl2 triple through xi0 and e^{2t} = hbar^theta,
// so Ad*(g) xi0 = hbar^theta xi0. Throws ParameterError unless 0 < theta < 1
// and 0 < hbar <= 1.
GroupMatrix make_contraction_element(const Covector& xi0, double hbar, double theta);
// Measured conditions; with params, also asserts condition (2) with
// constant C2 <= c_max and condition (3) with C3 <= c_max.
ContractionCheck check_contraction(const GroupMatrix& g, const Covector& xi0, double hbar, double theta);
void assert_contraction(const ContractionCheck& c, const ContractionParams& p, double c_max = 10.0);

// hbar^{-d-eps} (hbar^{2(1-kappa)} + hbar^{2 theta} |xi0|^2)^{(d+eps)/2}
double star_value(const ContractionParams& p, double xi0_norm, double hbar);
// (d + eps) min(1 - kappa, theta) - eps
double sigma_closed_form(const ContractionParams& p);

struct StarBoundReport {
  std::vector<double> hbar_grid;
  std::vector<double> values;
  PowerFit fit;  // values ~ hbar^{-d + sigma}
  double sigma_fit = 0.0;
  double sigma_closed = 0.0;
  nlohmann::json to_json() const;
};
std::vector<double> default_star_grid();
StarBoundReport star_bound(const ContractionParams& p, double xi0_norm, const std::vector<double>& hbar_grid);

struct SigmaOptimum {
  ContractionParams params;
  double sigma_fit = 0.0;
  double sigma_closed = 0.0;
  int candidates = 0;
  nlohmann::json to_json() const;
};
// kappa = 1 - delta, eps in {0.01, 0.05}, theta on a grid in (0, delta + eps).
SigmaOptimum optimize_sigma(double delta, double xi0_norm = 1.0);

struct SmallBallSpec {
  Covector xi0 = Covector::from_ortho(Vec3(0.0, 1.0 / kSqrt2, -1.0 / kSqrt2));
  double delta = 0.3;
  BumpProfile profile{BumpProfile::Kind::Gauss, 1.0};
  Symbol at(double hbar) const;
  nlohmann::json to_json() const;
};

struct ChainRow {
  double hbar = 0.0;
  int K_max = 0;
  double Eh = 0.0;
  double sqrt_link = 0.0;        // |E - ||Op(sqrt a) v_I||^2| / E
  double c_sq = 0.0;             // ||Op(sqrt a) v_I||^2, the squared link constant
  double phi_sq = 0.0;           // |I(w1)|^2
  double tail = 0.0;             // weight of w1 and pi(g) w1 outside the interior block
  double sup_uncontracted = 0.0; // <Op(b) w1, w1>
  double b_at_center = 0.0;      // b(xi0)
  double sup_contracted = 0.0;   // <Op(b) pi(g) w1, pi(g) w1>
  double star = 0.0;
  double star_ratio = 0.0;       // sup_contracted / star
  double center_error = 0.0;     // |center of g.a - Ad*(g) xi0| / hbar^{delta - theta}
  double radius_ratio = 0.0;     // measured radius / hbar^{delta - theta}
  ContractionCheck contraction;
  nlohmann::json to_json() const;
};

struct BoundChainReport {
  std::vector<ChainRow> rows;
  ContractionParams params;
  std::string functional;
  std::string automorphic_link;  // "evaluated" (maass) or "assumed" (synthetic)
  PowerFit Eh_fit;
  PowerFit uncontracted_fit;
  PowerFit contracted_fit;
  double sigma_closed = 0.0;
  double max_star_ratio = 0.0;
  nlohmann::json to_json() const;
};

struct ChainOptions {
  double star_factor = 3.0;   // contracted link must stay below star_factor * star
  double center_tol = 0.1;
  double radius_lo = 0.5, radius_hi = 2.0;
  double sqrt_tol = 0.1;      // |E - c^2| / E
  bool enforce = true;        // throw ValidationError naming the first failing link
};

BoundChainReport bound_chain(const SmallBallSpec& spec, const FunctionalModel& I, const ContractionParams& params,
                             double r, const QuantScheme& base, const std::vector<double>& hbar_grid,
                             const ChainOptions& opt = {});

}  // namespace orbitlab
