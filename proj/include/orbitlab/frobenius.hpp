#pragma once

// Gamma-invariant functionals I on the principal series, given by their
// values iota_k = I(e_k) on the K-types, and the pairings built on them.
//
// The vector of I is v_I = conj(iota), so I(v) = <v, v_I>.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbitlab/quantize.hpp"
#include "orbitlab/repn_ps.hpp"
#include "orbitlab/symbols.hpp"

namespace orbitlab {

struct SobolevEvidence {
  double s = 0.0;
  double norm_half = 0.0;  // at K_max / 2
  double norm_full = 0.0;  // at K_max
  double change = 0.0;     // relative
  bool stable = false;     // change < 1%
  nlohmann::json to_json() const;
};

class FunctionalModel {
 public:
  enum class Kind { Synthetic, Maass };

  FunctionalModel() = default;
  FunctionalModel(CVector coeffs, int K_max, Kind kind, std::string provenance, double declared_s);

  int K_max() const { return K_max_; }
  Kind kind() const { return kind_; }
  const std::string& provenance() const { return provenance_; }
  double declared_s() const { return declared_s_; }
  const CVector& coeffs() const { return coeffs_; }

  // iota_k; zero outside |k| <= K_max and for odd k.
  cplx iota(int k) const;
  // v_I in the basis of pi, truncated or zero padded to pi.K_max().
  KTypeVector vector_for(const PrincipalSeries& pi) const;
  // I(v) = sum_k v_k iota_k.
  cplx apply(const KTypeVector& v) const;

  // sum_{|k| <= K} |iota_k|^2 lambda_k^{-s}, lambda_k the Delta eigenvalue.
  double dual_norm_sq(double r, double s, int K) const;
  SobolevEvidence evidence(double r, double s) const;
  nlohmann::json to_json() const;

 private:
  CVector coeffs_;  // index (k + K_max) / 2
  int K_max_ = 0;
  Kind kind_ = Kind::Synthetic;
  std::string provenance_;
  double declared_s_ = 0.0;
};

// iota_k = (1 + k^2)^{s/2 - 3/4} e^{i theta_k}, theta_k from the seed. With
// `real` the phases satisfy iota_{-k} = conj(iota_k).
FunctionalModel synthetic_functional(double s_star, std::uint64_t seed, int K_max, bool real = true);

struct MaassFormData {
  double r = 0.0;
  std::string parity;
  std::vector<double> a;  // a[n - 1] = a_n
  std::vector<std::string> source;
  std::string path;
  double hecke_residual = 0.0;
  double automorphy_residual = 0.0;  // relative to the largest sampled |phi|
  int N() const { return static_cast<int>(a.size()); }
  double coeff(int n) const { return a.at(static_cast<std::size_t>(std::abs(n)) - 1); }
  nlohmann::json to_json() const;
};

// Parses and validates (Hecke relations and automorphy). Throws ParseError,
// ValidationError.
MaassFormData load_maass_data(const std::string& path);
MaassFormData parse_maass_data(const std::string& text, const std::string& origin = "<text>");
// Largest |a_m a_n - sum_{d | (m,n)} a_{mn/d^2}| over m, n >= 2 with mn <= N.
// When `first_bad` is given it receives the first pair above `tol`.
double hecke_residual(const MaassFormData& d, double tol = 1e-5, std::pair<int, int>* first_bad = nullptr);
// max |phi(gamma z) - phi(z)| / max |phi| over 20 points of the fundamental
// domain and gamma in {S, T}.
double automorphy_residual(const MaassFormData& d);

// phi(z) e^{pi r / 2} from the truncated Fourier expansion of an even form.
double maass_phi_scaled(const MaassFormData& d, cplx z);

struct MaassFunctionalInfo {
  std::vector<double> oracle_error;  // per k in {-4, -2, 2, 4}
  double worst_oracle = 0.0;
  double tail_term = 0.0;  // largest relative size of the last Fourier term
  double parity_defect = 0.0;
  double miller_change = 0.0;  // backward recursion, start doubled
  nlohmann::json to_json() const;
};

// iota_k = value at the identity of the weight-k vector of the automorphic
// realization of pi, scaled by e^{pi r / 2}. Each Fourier term is carried
// through the raising / lowering recurrence at y = 1; |k| <= 4 is checked
// against nested differentiation of phi along H and E + F.
FunctionalModel functional_from_maass(const MaassFormData& d, const PrincipalSeries& pi, int K_max,
                                      MaassFunctionalInfo* info = nullptr);
// Derivative-free check of iota_k, |k| <= 4, by differencing phi on the group.
cplx maass_iota_by_differencing(const MaassFormData& d, const PrincipalSeries& pi, int k, double step = 2e-3);

struct EhReport {
  double hbar = 0.0;
  double value = 0.0;     // <Op(a) v_I, v_I>
  double imag = 0.0;
  double symmetric = 0.0;  // ||Op(sqrt a) v_I||^2, 0 when not computed
  double agreement = 0.0;  // |value - symmetric| / |value|
  double value_doubled = 0.0;
  double truncation_change = 0.0;
  int K_max = 0;
  std::string functional;
  nlohmann::json to_json() const;
};

struct EhOptions {
  enum class Doubling {
    Off,
    Exact,    // reassemble with 2 K_max
    Symbolic  // bound the added K-types by |iota_k|^2 max of |a| on the orbit ring at k
  };
  bool symmetric = true;
  Doubling doubling = Doubling::Exact;
  double doubling_tol = 0.02;
};

// E_hbar(a) = I(Op(a) I). Throws TruncationError if the value moves more than
// doubling_tol when K_max doubles.
EhReport eval_Eh(const Symbol& a, const FunctionalModel& I, const PrincipalSeries& pi, const QuantScheme& scheme,
                 const EhOptions& opt = {});

struct DyadicRow {
  double hbar = 0.0;
  double Eh = 0.0;
  double orbit_integral = 0.0;
  double ratio = 0.0;  // E / (hbar^{-1} int_{hbar O} a)
  double truncation_change = 0.0;
  int K_max = 0;
};
struct DyadicReport {
  std::vector<DyadicRow> rows;
  double max_ratio = 0.0;
  double min_ratio = 0.0;
  std::string functional;
  nlohmann::json to_json() const;
};
// Point of hbar O_{pi_r} above the K-type k: xi_3 = hbar k / sqrt2.
Vec3 orbit_point_at(int k, double phi, double hbar, double r);
// max over the ring of |a| at the K-type k.
double ring_max(const Symbol& a, int k, double hbar, double r);
// Smallest multiple of 4 (at least 64) whose interior block holds every
// K-type where ring_max exceeds tol times its peak, plus a margin of 8.
int orbit_covering_K(const Symbol& a, double hbar, double r, double tol = 1e-8);

// Symbolic doubling; the covering K is taken from orbit_covering_K.
DyadicReport dyadic_bound_report(const Symbol& a, const FunctionalModel& I, double r,
                                 const std::vector<double>& hbar_grid, const QuantScheme& base);

struct SobolevNormRow {
  double hbar = 0.0;
  double value = 0.0;  // <Op(a^{s,kappa}) v_I, v_I> + tail
  double tail = 0.0;
  int K_max = 0;
};
struct SobolevNormReport {
  std::vector<SobolevNormRow> rows;
  double ratio = 0.0;
  nlohmann::json to_json() const;
};
// ||I||^2 in the dual of H_{s, r} with r = hbar^{-kappa}, i.e. the form of
// Op(a^{s,kappa}) ~ Op(b^{s,kappa})^{-1} evaluated on v_I. K-types beyond the
// assembled block contribute |iota_k|^2 a(hbar sqrt(k^2 + 2 r^2)).
SobolevNormReport functional_sobolev_norm(const FunctionalModel& I, double s, double kappa, double r,
                                          const std::vector<double>& hbar_grid, const QuantScheme& base);

struct SupNormReport {
  double I_sq = 0.0;    // |I(v)|^2
  double H_form = 0.0;  // <Op(b^{s,kappa}) v, v>
  double ratio = 0.0;
  double norm = 0.0;
  nlohmann::json to_json() const;
};
SupNormReport sup_norm_bound_report(const KTypeVector& v, const FunctionalModel& I, double s, double kappa,
                                    const PrincipalSeries& pi, const QuantScheme& scheme);
// Op(a) v_I, normalized.
KTypeVector microlocalized_vector(const Symbol& a, const FunctionalModel& I, const PrincipalSeries& pi,
                                  const QuantScheme& scheme);

}  // namespace orbitlab
