#include "orbitlab/quantize.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "orbitlab/error.hpp"
#include "orbitlab/kernels.hpp"
#include "orbitlab/quadrature.hpp"

namespace orbitlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kChunks = 8;  // fixed so that results do not depend on the thread count

std::mutex g_sink_mutex;
std::ostream* g_sink = nullptr;

struct NodeSet {
  std::vector<double> ginv;  // 4 per node
  std::vector<cplx> coef;
  double stretch = 1.0;
  long size() const { return static_cast<long>(coef.size()); }
};

void push_node(NodeSet& ns, const Vec3& y, cplx c) {
  const GroupMatrix g = exp_map(AlgebraVector::from_ortho(-y));
  ns.ginv.insert(ns.ginv.end(), {g(0, 0), g(0, 1), g(1, 0), g(1, 1)});
  ns.coef.push_back(c);
}

// Largest stretch among the nodes that carry all but 1e-13 of the total
// coefficient mass; the rest cannot fold back more than that.
void finalize_stretch(NodeSet& ns) {
  const long n = ns.size();
  std::vector<long> order(n);
  for (long j = 0; j < n; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](long x, long y) { return std::abs(ns.coef[x]) < std::abs(ns.coef[y]); });
  double total = 0.0;
  for (const auto& c : ns.coef) total += std::abs(c);
  double dropped = 0.0;
  double st = 1.0;
  for (long q = 0; q < n; ++q) {
    const long j = order[q];
    dropped += std::abs(ns.coef[j]);
    if (dropped <= 1e-13 * total) continue;
    Mat2 mm;
    mm << ns.ginv[4 * j], ns.ginv[4 * j + 1], ns.ginv[4 * j + 2], ns.ginv[4 * j + 3];
    st = std::max(st, stretch_of(GroupMatrix(mm, 1e-8)));
  }
  ns.stretch = st;
}

OperatorMatrix accumulate(const NodeSet& ns, const PrincipalSeries& pi, int col_K, int threads, int* Np_out) {
  const int Np = circle_samples_for(pi, col_K, ns.stretch);
  if (Np_out) *Np_out = Np;
  std::vector<CircleAccumulator> parts;
  parts.reserve(kChunks);
  for (int c = 0; c < kChunks; ++c) parts.emplace_back(pi, col_K, Np);
  const long n = ns.size();
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex fail_mutex;
  auto work = [&] {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= kChunks) return;
      const long lo = n * c / kChunks, hi = n * (c + 1) / kChunks;
      try {
        parts[c].add_batch(ns.ginv.data() + 4 * lo, ns.coef.data() + lo, static_cast<int>(hi - lo));
      } catch (...) {
        std::lock_guard<std::mutex> lk(fail_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int T = std::max(1, std::min(threads, kChunks));
  if (T == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < T; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  for (int c = 1; c < kChunks; ++c) parts[0].merge(parts[c]);
  // Np only keeps the retained rows clean (2 Np > B + K); the guard-band
  // energy is recorded, not enforced.
  return parts[0].finish(1e-8, -1);
}

// Nyquist-type x spacing for the integrand chi(hx) a^v(x) <pi(exp hx) e_n, e_k>.
double lattice_spacing(const Symbol& a, const PrincipalSeries& pi, const QuantScheme& s, int col_K) {
  if (s.spacing > 0.0) return s.spacing;
  const double xa = a.frequency_extent();
  if (!std::isfinite(xa)) throw ParameterError("symbol '" + a.meta().spec + "' has no bounded frequency support");
  const double xp = s.hbar * (std::max(col_K, pi.interior_K()) + 8);
  return 2.0 * kPi / ((xa + xp) * s.oversample);
}

NodeSet lattice_nodes(const InverseFT& ift, const QuantScheme& s, double h, double X) {
  const int M = static_cast<int>(std::floor(X / h));
  const long side = 2L * M + 1;
  if (side * side * side > 120'000'000L) throw ParameterError("x-lattice too large; lower the resolution");
  std::vector<cplx> vals;
  ift.on_grid(h, M, vals);
  NodeSet ns;
  const double w = h * h * h;
  for (int i = -M; i <= M; ++i)
    for (int j = -M; j <= M; ++j)
      for (int k = -M; k <= M; ++k) {
        const Vec3 x(h * i, h * j, h * k);
        const double r = x.norm();
        if (r > X) continue;
        const double c = s.chi(s.hbar * r);
        if (c == 0.0) continue;
        const cplx v = vals[((i + M) * side + (j + M)) * side + (k + M)];
        if (v == 0.0) continue;
        push_node(ns, s.hbar * x, w * c * v);
      }
  return ns;
}

// K-invariant symbols: the operator is diagonal and its diagonal only sees
// the (|x_12|, x3) dependence. Gauss panels in |x_12| with weight 2 pi rho,
// trapezoid in x3.
NodeSet polar_nodes(const InverseFT& ift, const QuantScheme& s, double h, double X) {
  NodeSet ns;
  const auto& g = gauss_legendre(16);
  const double pw = 4.0 * h;
  const int panels = std::max(1, static_cast<int>(std::ceil(X / pw)));
  const double wd = X / panels;
  const int M = static_cast<int>(std::floor(X / h));
  for (int p = 0; p < panels; ++p)
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      const double rho = wd * (p + 0.5 * (g.nodes[q] + 1.0));
      const double wr = 0.5 * wd * g.weights[q] * 2.0 * kPi * rho;
      for (int k = -M; k <= M; ++k) {
        const Vec3 x(rho, 0.0, h * k);
        const double r = x.norm();
        if (r > X) continue;
        const double c = s.chi(s.hbar * r);
        if (c == 0.0) continue;
        const cplx v = ift.value(x);
        if (v == 0.0) continue;
        push_node(ns, s.hbar * x, wr * h * c * v);
      }
    }
  return ns;
}

OperatorMatrix assemble_once(const Symbol& a, const PrincipalSeries& pi, const QuantScheme& s, double h,
                             AssemblyInfo& info) {
  const int col_K = s.interior_columns_only ? pi.interior_K() : pi.K_max();
  const InverseFT& ift = a.ift();
  const double X = std::min(ift.decay_radius(s.decay_tol), s.rho2 / s.hbar);
  const bool polar = ift.k_invariant();
  NodeSet ns = polar ? polar_nodes(ift, s, h, X) : lattice_nodes(ift, s, h, X);
  finalize_stretch(ns);
  int Np = 0;
  OperatorMatrix m = ns.size() ? accumulate(ns, pi, col_K, s.threads, &Np)
                               : OperatorMatrix{CMatrix::Zero(pi.dim(), pi.dim()), pi.K_max(), s.hbar, "", 0.0};
  if (polar) m.entries = CMatrix(m.entries.diagonal().asDiagonal());
  info.nodes = ns.size();
  info.spacing = h;
  info.x_radius = X;
  info.half_samples = Np;
  info.col_K = col_K;
  info.aliasing = m.aliasing;
  return m;
}

double interior_change(const OperatorMatrix& a, const OperatorMatrix& b) {
  const CMatrix ia = a.interior(), ib = b.interior();
  const double n = ib.norm();
  return n > 0 ? (ia - ib).norm() / n : (ia - ib).norm();
}

void emit(const Symbol& a, const PrincipalSeries& pi, const QuantScheme& s, const AssemblyInfo& info) {
  std::lock_guard<std::mutex> lk(g_sink_mutex);
  if (!g_sink) return;
  nlohmann::json j;
  j["record"] = "assemble_op";
  j["symbol"] = a.meta().spec;
  j["r"] = pi.r();
  j["K_max"] = pi.K_max();
  j["scheme"] = s.to_json();
  j["info"] = info.to_json();
  (*g_sink) << j.dump() << '\n';
}

CMatrix interior_of(const CMatrix& m, const PrincipalSeries& pi) {
  return m.block(pi.interior_begin(), pi.interior_begin(), pi.interior_dim(), pi.interior_dim());
}

}  // namespace

double QuantScheme::chi(double y) const { return plateau(y, rho1, rho2); }

void QuantScheme::validate() const {
  if (!(hbar > 0.0 && hbar <= 1.0)) throw ParameterError("hbar must lie in (0, 1]");
  if (!(rho1 > 0.0 && rho1 < rho2)) throw ParameterError("chi needs 0 < rho1 < rho2");
  if (rho2 > kExpDomainRadius) throw ParameterError("chi support exceeds the exponential chart");
  if (spacing < 0.0 || !(oversample >= 1.0)) throw ParameterError("bad lattice spacing settings");
  if (!(decay_tol > 0.0 && decay_tol < 1e-3)) throw ParameterError("decay_tol out of range");
  if (threads < 1) throw ParameterError("threads must be >= 1");
}

nlohmann::json QuantScheme::to_json() const {
  return {{"hbar", hbar},         {"rho1", rho1},         {"rho2", rho2},
          {"spacing", spacing},   {"oversample", oversample}, {"decay_tol", decay_tol},
          {"interior_columns_only", interior_columns_only}, {"refine", refine}};
}

nlohmann::json AssemblyInfo::to_json() const {
  return {{"nodes", nodes},           {"spacing", spacing},       {"x_radius", x_radius},
          {"half_samples", half_samples}, {"col_K", col_K},       {"aliasing", aliasing},
          {"interior_mass", interior_mass}, {"refinement_change", refinement_change},
          {"refinements", refinements}, {"seconds", seconds},     {"isa", isa}};
}

void set_diagnostic_sink(std::ostream* os) {
  std::lock_guard<std::mutex> lk(g_sink_mutex);
  g_sink = os;
}

OperatorMatrix assemble_op(const Symbol& a, const PrincipalSeries& pi, const QuantScheme& scheme, AssemblyInfo* info_out) {
  scheme.validate();
  if (!a.valid()) throw ParameterError("empty symbol");
  if (!a.has_ift()) throw ParameterError("symbol '" + a.meta().spec + "' has no inverse transform provider");
  const auto t0 = std::chrono::steady_clock::now();
  AssemblyInfo info;
  info.isa = kernels::isa_name(kernels::active_isa());
  const int col_K = scheme.interior_columns_only ? pi.interior_K() : pi.K_max();
  double h = lattice_spacing(a, pi, scheme, col_K);
  OperatorMatrix m = assemble_once(a, pi, scheme, h, info);
  if (scheme.refine) {
    for (int it = 1;; ++it) {
      h /= 1.25;
      AssemblyInfo fine;
      OperatorMatrix mf = assemble_once(a, pi, scheme, h, fine);
      const double ch = interior_change(m, mf);
      fine.refinement_change = ch;
      fine.refinements = it;
      fine.isa = info.isa;
      m = std::move(mf);
      info = fine;
      if (ch <= scheme.refine_tol) break;
      if (it == 3) throw NumericalError("quadrature refinement stalled at relative change " + std::to_string(ch));
    }
  }
  if (!scheme.interior_columns_only) {
    const double tot = m.entries.squaredNorm();
    info.interior_mass = tot > 0 ? m.interior().squaredNorm() / tot : 1.0;
    if (scheme.check_truncation && a.meta().support.kind != SupportDescriptor::Kind::Global &&
        info.interior_mass < scheme.mass_fraction)
      throw TruncationError("interior block holds only " + std::to_string(info.interior_mass) +
                            " of the operator mass; raise K_max");
  }
  m.hbar = scheme.hbar;
  m.provenance = "Op(" + a.meta().spec + ")";
  info.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit(a, pi, scheme, info);
  if (info_out) *info_out = info;
  return m;
}

cplx trace(const OperatorMatrix& m) {
  const CMatrix in = m.interior();
  cplx t = 0.0;
  for (int i = 0; i < in.rows(); ++i) t += in(i, i);
  return t;
}

TraceResult trace_extrapolated(const std::function<Symbol(const PrincipalSeries&)>& family, const PrincipalSeries& pi,
                               const QuantScheme& scheme, double tail_order, double tail_tol) {
  QuantScheme s = scheme;
  s.interior_columns_only = true;
  const PrincipalSeries pi2 = pi.with_K(2 * pi.K_max());
  TraceResult r;
  r.K_max = pi.K_max();
  // the diagonal only depends on the K-average of the symbol
  auto diag_symbol = [&](const PrincipalSeries& p) {
    const Symbol a = family(p);
    return a.has_ift() && a.ift().k_invariant() ? a : k_average(a);
  };
  r.raw = trace(assemble_op(diag_symbol(pi), pi, s));
  r.doubled = trace(assemble_op(diag_symbol(pi2), pi2, s));
  const double n = std::abs(r.doubled);
  r.tail_change = n > 0 ? std::abs(r.doubled - r.raw) / n : std::abs(r.doubled - r.raw);
  r.extrapolated = r.doubled;
  if (tail_order > 0.0) r.extrapolated += (r.doubled - r.raw) / (std::pow(2.0, tail_order) - 1.0);
  if (r.tail_change > tail_tol)
    throw TruncationError("trace tail does not settle under K_max doubling (relative change " +
                          std::to_string(r.tail_change) + ")");
  return r;
}

TraceResult trace_extrapolated(const Symbol& a, const PrincipalSeries& pi, const QuantScheme& scheme,
                               double tail_order, double tail_tol) {
  return trace_extrapolated([&](const PrincipalSeries&) { return a; }, pi, scheme, tail_order, tail_tol);
}

nlohmann::json DefectReport::to_json() const {
  return {{"defect", defect}, {"scale", scale}, {"relative", relative()}};
}

DefectReport compose_defect(const Symbol& a, const Symbol& b, const PrincipalSeries& pi, const QuantScheme& scheme) {
  QuantScheme s = scheme;
  s.interior_columns_only = false;
  const OperatorMatrix A = assemble_op(a, pi, s);
  const bool same = a.ift_ptr() == b.ift_ptr() && a.meta().spec == b.meta().spec;
  const OperatorMatrix B = same ? A : assemble_op(b, pi, s);
  const OperatorMatrix AB = assemble_op(multiply(a, b), pi, s);
  const CMatrix prod = A.entries * B.entries;
  DefectReport r;
  r.defect = interior_opnorm(prod - AB.entries, pi);
  r.scale = interior_opnorm(A.entries, pi) * interior_opnorm(B.entries, pi);
  return r;
}

DefectReport sqrt_defect(const Symbol& a, const PrincipalSeries& pi, const QuantScheme& scheme) {
  QuantScheme s = scheme;
  s.interior_columns_only = false;
  const OperatorMatrix A = assemble_op(a, pi, s);
  const OperatorMatrix R = assemble_op(sqrt_symbol(a), pi, s);
  DefectReport r;
  r.defect = interior_opnorm(A.entries - R.entries * R.entries, pi);
  r.scale = interior_opnorm(A.entries, pi);
  return r;
}

DefectReport equivariance_defect(const GroupMatrix& g, const Symbol& a, const PrincipalSeries& pi,
                                 const QuantScheme& scheme) {
  QuantScheme s = scheme;
  s.interior_columns_only = false;
  const OperatorMatrix A = assemble_op(a, pi, s);
  const OperatorMatrix GA = assemble_op(act(g, a), pi, s);
  const OperatorMatrix P = pi_of_g(pi, g);
  const OperatorMatrix Pi = pi_of_g(pi, g.inverse());
  DefectReport r;
  r.defect = interior_opnorm(GA.entries - P.entries * A.entries * Pi.entries, pi);
  r.scale = interior_opnorm(A.entries, pi);
  return r;
}

nlohmann::json PositivityReport::to_json() const {
  return {{"floor", floor}, {"hermiticity", hermiticity}, {"opnorm", opnorm}};
}

PositivityReport positivity_of(const OperatorMatrix& m) {
  const CMatrix in = m.interior();
  const CMatrix herm = 0.5 * (in + in.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  PositivityReport r;
  r.floor = es.eigenvalues().minCoeff();
  r.opnorm = es.eigenvalues().cwiseAbs().maxCoeff();
  r.hermiticity = m.hermiticity_defect();
  return r;
}

PositivityReport positivity_floor(const Symbol& a, const PrincipalSeries& pi, const QuantScheme& scheme) {
  if (!a.meta().real || !a.meta().nonnegative)
    throw ParameterError("positivity floor needs a real non-negative symbol");
  QuantScheme s = scheme;
  s.interior_columns_only = false;
  return positivity_of(assemble_op(a, pi, s));
}

nlohmann::json AReport::to_json() const {
  return {{"cond", cond}, {"norm", norm}, {"inv_norm", inv_norm}, {"minus_identity", minus_identity}};
}

SobolevPair sobolev_for(const PrincipalSeries& pi, double hbar, double s, double kappa) {
  const double Kin = pi.interior_K();
  const double xi_block = hbar * std::sqrt(Kin * Kin + 2.0 * pi.r() * pi.r());
  return make_sobolev(hbar, s, kappa, Taper::for_block(xi_block), 1.05 / hbar);
}

AReport A_of_h(double s, double kappa, const PrincipalSeries& pi, const QuantScheme& scheme) {
  if (!(s >= 0.0)) throw ParameterError("s must be >= 0");
  if (!(kappa > 0.5 && kappa < 1.0)) throw ParameterError("kappa must lie in (1/2, 1)");
  QuantScheme sc = scheme;
  sc.interior_columns_only = false;
  sc.check_truncation = false;
  const SobolevPair sp = sobolev_for(pi, scheme.hbar, s, kappa);
  const OperatorMatrix B = assemble_op(sp.b, pi, sc);
  const OperatorMatrix A = assemble_op(sp.a_inv, pi, sc);
  const CMatrix prod = interior_of(B.entries * A.entries, pi);
  Eigen::JacobiSVD<CMatrix> svd(prod);
  const auto& sv = svd.singularValues();
  AReport r;
  r.norm = sv(0);
  const double smin = sv(sv.size() - 1);
  if (smin < 1e-10) throw NumericalError("A(h) is numerically singular");
  r.inv_norm = 1.0 / smin;
  r.cond = r.norm * r.inv_norm;
  r.minus_identity = opnorm(prod - CMatrix::Identity(prod.rows(), prod.cols()));
  return r;
}

nlohmann::json UniformTraceReport::to_json() const {
  return {{"hbar", hbar_grid}, {"trace", values}, {"raw", raw}, {"ratio", ratio}};
}

UniformTraceReport uniform_trace_bound(double s, double kappa, double r, const std::vector<double>& hbar_grid,
                                       const QuantScheme& base) {
  if (!(s > 1.0)) throw ParameterError("uniform trace bound needs s > d = 1");
  if (hbar_grid.empty()) throw ParameterError("empty hbar grid");
  UniformTraceReport rep;
  rep.hbar_grid = hbar_grid;
  for (double h : hbar_grid) {
    QuantScheme sc = base;
    sc.hbar = h;
    sc.check_truncation = false;
    const PrincipalSeries pi(r, PrincipalSeries::default_K_max(h));
    auto fam = [&](const PrincipalSeries& p) { return sobolev_for(p, h, s, kappa).a_inv; };
    const TraceResult t = trace_extrapolated(fam, pi, sc, s - 1.0, 0.5);
    rep.values.push_back(t.extrapolated.real());
    rep.raw.push_back(t.raw.real());
  }
  const auto [mn, mx] = std::minmax_element(rep.values.begin(), rep.values.end());
  rep.ratio = *mn > 0 ? *mx / *mn : std::numeric_limits<double>::infinity();
  return rep;
}

nlohmann::json CalibrationReport::to_json() const {
  return {{"defect", defect}, {"diagonal_defect", diagonal_defect}, {"K_max", K_max}};
}

CalibrationReport calibrate_delta(const PrincipalSeries& pi, const QuantScheme& scheme) {
  if (std::abs(scheme.hbar - 1.0) > 1e-15) throw ParameterError("calibration runs at hbar = 1");
  QuantScheme sc = scheme;
  sc.interior_columns_only = false;
  sc.check_truncation = false;
  const double Kin = pi.interior_K();
  const Taper t = Taper::for_block(std::sqrt(Kin * Kin + 2.0 * pi.r() * pi.r()), 3.0);
  const OperatorMatrix P = assemble_op(make_laplace_symbol(t, 1.05), pi, sc);
  const OperatorMatrix D = delta_matrix(pi);
  CalibrationReport r;
  r.K_max = pi.K_max();
  const CMatrix ip = P.interior(), id = D.interior();
  r.defect = (ip - id).norm() / id.norm();
  for (int i = 0; i < id.rows(); ++i)
    r.diagonal_defect = std::max(r.diagonal_defect, std::abs(ip(i, i) - id(i, i)) / std::abs(id(i, i)));
  return r;
}

HermFormRep HermFormRep::standard(const PrincipalSeries& pi) {
  HermFormRep f;
  f.kind = Kind::Standard;
  f.matrix.entries = CMatrix::Identity(pi.dim(), pi.dim());
  f.matrix.K_max = pi.K_max();
  f.provenance = "standard";
  return f;
}

HermFormRep HermFormRep::sobolev(const PrincipalSeries& pi, int s) {
  HermFormRep f;
  f.kind = Kind::H;
  f.matrix.entries = CMatrix::Zero(pi.dim(), pi.dim());
  for (int i = 0; i < pi.dim(); ++i) f.matrix.entries(i, i) = std::pow(delta_eigenvalue(pi.r(), pi.weight_of(i)), s);
  f.matrix.K_max = pi.K_max();
  f.provenance = "sobolev(" + std::to_string(s) + ")";
  return f;
}

cplx HermFormRep::evaluate(const KTypeVector& v) const { return evaluate(v, v); }

cplx HermFormRep::evaluate(const KTypeVector& v, const KTypeVector& u) const {
  if (v.K_max != matrix.K_max || u.K_max != matrix.K_max) throw ParameterError("form and vector truncations differ");
  return u.coeffs.dot(matrix.entries * v.coeffs);
}

double relative_trace(const HermFormRep& P, const HermFormRep& Q) {
  if (P.matrix.K_max != Q.matrix.K_max) throw ParameterError("forms have different truncations");
  const CMatrix p = P.matrix.interior(), q = Q.matrix.interior();
  const CMatrix qh = 0.5 * (q + q.adjoint());
  Eigen::LLT<CMatrix> llt(qh);
  if (llt.info() != Eigen::Success) throw DomainError("reference form is not positive definite on the interior block");
  const CMatrix L = llt.matrixL();
  const CMatrix X = L.triangularView<Eigen::Lower>().solve(p);
  const CMatrix Y = L.triangularView<Eigen::Lower>().solve(CMatrix(X.adjoint())).adjoint();
  return Y.trace().real();
}

nlohmann::json ClassProbeReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) arr.push_back({{"word", e.word}, {"s", e.s}, {"norm", e.norm}});
  return {{"entries", arr}, {"max_norm", max_norm}};
}

ClassProbeReport operator_class_probe(const OperatorMatrix& m, const PrincipalSeries& pi, int order,
                                      const std::vector<EnvelopeWord>& words) {
  if (m.K_max != pi.K_max()) throw ParameterError("operator truncation does not match the representation");
  const Vec3 e[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  CMatrix dpi[3];
  for (int i = 0; i < 3; ++i) dpi[i] = algebra_action(pi, AlgebraVector::from_ortho(e[i])).entries;
  ClassProbeReport rep;
  const int b = pi.interior_begin(), n = pi.interior_dim();
  for (const auto& w : words) {
    CMatrix t = m.entries;
    for (int i : w) {
      if (i < 1 || i > 3) throw ParameterError("envelope words use letters 1, 2, 3");
      t = dpi[i - 1] * t - t * dpi[i - 1];
    }
    // entries within |w| of the truncation edge are unreliable; the interior block is not affected
    const CMatrix in = t.block(b, b, n, n);
    for (int s = -2; s <= 2; ++s) {
      Eigen::VectorXd left(n), right(n);
      for (int i = 0; i < n; ++i) {
        const double lam = delta_eigenvalue(pi.r(), pi.weight_of(b + i));
        left(i) = std::pow(lam, 0.5 * (s - order));
        right(i) = std::pow(lam, -0.5 * s);
      }
      const CMatrix scaled = left.asDiagonal() * in * right.asDiagonal();
      const double nv = opnorm(scaled);
      if (!std::isfinite(nv)) throw NumericalError("class probe norm is not finite");
      rep.entries.push_back({w, s, nv});
      rep.max_norm = std::max(rep.max_norm, nv);
    }
  }
  return rep;
}

}  // namespace orbitlab
