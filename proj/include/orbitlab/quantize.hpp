#pragma once

// Op_hbar(a) = int chi(hbar x) a^v(x) pi(exp(hbar x)) dx  (Lebesgue dx, orthonormal x)
// and the calculus measurements built on it.

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbitlab/repn_ps.hpp"
#include "orbitlab/symbols.hpp"

namespace orbitlab {

struct QuantScheme {
  double hbar = 0.1;
  double rho1 = 0.5;  // chi = 1 on |y| <= rho1
  double rho2 = 1.0;  // chi = 0 on |y| >= rho2
  double spacing = 0.0;      // x-lattice step; 0 picks it from the frequency content
  double oversample = 1.15;  // safety factor on the Nyquist spacing
  double decay_tol = 1e-12;  // a^v is dropped where it falls below this (relative)
  // Only the columns of the interior block are computed. Enough for traces and
  // interior quadratic forms, not for products.
  bool interior_columns_only = false;
  // Cauchy refinement of the lattice (up to 3 shrinks by 1.25).
  bool refine = false;
  double refine_tol = 5e-3;
  // Micro-localized symbols must keep 99% of the Frobenius mass in the interior block.
  bool check_truncation = true;
  double mass_fraction = 0.99;
  int threads = 1;

  double chi(double y) const;
  void validate() const;
  nlohmann::json to_json() const;
};

struct AssemblyInfo {
  long nodes = 0;
  double spacing = 0.0;
  double x_radius = 0.0;
  int half_samples = 0;
  int col_K = 0;
  double aliasing = 0.0;
  double interior_mass = 1.0;
  double refinement_change = 0.0;
  int refinements = 0;
  double seconds = 0.0;
  std::string isa;
  nlohmann::json to_json() const;
};

OperatorMatrix assemble_op(const Symbol& a, const PrincipalSeries& pi, const QuantScheme& scheme,
                           AssemblyInfo* info = nullptr);

// Diagnostic JSON lines (one per assembled operator) go here when set.
void set_diagnostic_sink(std::ostream* os);

// Sum of the diagonal over the interior block.
cplx trace(const OperatorMatrix& m);

struct TraceResult {
  cplx raw = 0.0;       // at K_max
  cplx doubled = 0.0;   // at 2 K_max
  cplx extrapolated = 0.0;
  int K_max = 0;
  double tail_change = 0.0;  // |doubled - raw| / |doubled|
};

// Trace at K_max and 2 K_max combined as if the truncation error decayed like
// K^{-tail_order} (tail_order <= 0: no correction). Throws TruncationError if
// the relative change exceeds tail_tol. `family` rebuilds the symbol for a
// given K_max (growing symbols carry a K-dependent taper).
TraceResult trace_extrapolated(const std::function<Symbol(const PrincipalSeries&)>& family,
                               const PrincipalSeries& pi, const QuantScheme& scheme, double tail_order = 0.0,
                               double tail_tol = 0.25);
TraceResult trace_extrapolated(const Symbol& a, const PrincipalSeries& pi, const QuantScheme& scheme,
                               double tail_order = 0.0, double tail_tol = 0.25);

struct DefectReport {
  double defect = 0.0;  // interior operator norm
  double scale = 0.0;   // normalizing operator norm
  double relative() const { return scale > 0 ? defect / scale : defect; }
  nlohmann::json to_json() const;
};

// || Op(a) Op(b) - Op(ab) ||, scale ||Op(a)|| ||Op(b)||.
DefectReport compose_defect(const Symbol& a, const Symbol& b, const PrincipalSeries& pi,
                            const QuantScheme& scheme);
// || Op(a) - Op(sqrt a)^2 ||.
DefectReport sqrt_defect(const Symbol& a, const PrincipalSeries& pi, const QuantScheme& scheme);
// || Op(g.a) - pi(g) Op(a) pi(g)^{-1} ||, scale ||Op(a)||.
DefectReport equivariance_defect(const GroupMatrix& g, const Symbol& a, const PrincipalSeries& pi,
                                 const QuantScheme& scheme);

struct PositivityReport {
  double floor = 0.0;  // smallest eigenvalue of the Hermitian part, interior block
  double hermiticity = 0.0;
  double opnorm = 0.0;
  nlohmann::json to_json() const;
};
PositivityReport positivity_floor(const Symbol& a, const PrincipalSeries& pi, const QuantScheme& scheme);
PositivityReport positivity_of(const OperatorMatrix& m);

struct AReport {
  double cond = 0.0;
  double norm = 0.0;
  double inv_norm = 0.0;
  double minus_identity = 0.0;  // ||A - 1||
  nlohmann::json to_json() const;
};
// A(h) = Op(b^{s,kappa}) Op(a^{s,kappa}) on the interior block.
AReport A_of_h(double s, double kappa, const PrincipalSeries& pi, const QuantScheme& scheme);

// Sobolev pair with the taper matched to the interior block of pi.
SobolevPair sobolev_for(const PrincipalSeries& pi, double hbar, double s, double kappa);

struct UniformTraceReport {
  std::vector<double> hbar_grid;
  std::vector<double> values;
  std::vector<double> raw;
  double ratio = 0.0;  // max / min
  nlohmann::json to_json() const;
};
UniformTraceReport uniform_trace_bound(double s, double kappa, double r, const std::vector<double>& hbar_grid,
                                       const QuantScheme& base);

struct CalibrationReport {
  double defect = 0.0;           // relative Frobenius defect, interior block
  double diagonal_defect = 0.0;  // largest relative diagonal mismatch
  int K_max = 0;
  nlohmann::json to_json() const;
};
CalibrationReport calibrate_delta(const PrincipalSeries& pi, const QuantScheme& scheme);

// Hermitian form v -> <M v, v>.
struct HermFormRep {
  enum class Kind { Standard, Q, H };
  OperatorMatrix matrix;
  Kind kind = Kind::Q;
  std::string provenance;
  static HermFormRep standard(const PrincipalSeries& pi);
  static HermFormRep sobolev(const PrincipalSeries& pi, int s);
  cplx evaluate(const KTypeVector& v) const;
  cplx evaluate(const KTypeVector& v, const KTypeVector& u) const;
};

// tr(P|Q): sum of generalized eigenvalues of P against Q on the interior block.
double relative_trace(const HermFormRep& P, const HermFormRep& Q);

// Universal-envelope words in the orthonormal basis, e.g. {} , {1}, {1,3}.
using EnvelopeWord = std::vector<int>;

struct ClassProbeEntry {
  EnvelopeWord word;
  int s = 0;
  double norm = 0.0;
};
struct ClassProbeReport {
  std::vector<ClassProbeEntry> entries;
  double max_norm = 0.0;
  nlohmann::json to_json() const;
};
// Norms pi^s -> pi^{s-m} of iterated commutators theta_u(M) for s in [-2, 2].
ClassProbeReport operator_class_probe(const OperatorMatrix& m, const PrincipalSeries& pi, int order,
                                      const std::vector<EnvelopeWord>& words);

}  // namespace orbitlab
