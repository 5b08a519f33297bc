#include "orbitlab/latticelab.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "orbitlab/error.hpp"
#include "orbitlab/orbits.hpp"
#include "orbitlab/quadrature.hpp"

namespace orbitlab {

namespace {

using V2 = Eigen::Vector2d;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& x, std::int64_t& y) {
  if (b == 0) {
    x = a >= 0 ? 1 : -1;
    y = 0;
    return std::abs(a);
  }
  std::int64_t x1, y1;
  const std::int64_t g = ext_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

std::int64_t norm_cap(double T) { return static_cast<std::int64_t>(std::floor(T * T * (1.0 + 1e-15))); }

// k range with |(a0, b0) + k (c, d)|^2 <= R2, exact in integers.
std::pair<std::int64_t, std::int64_t> k_range(std::int64_t a0, std::int64_t b0, std::int64_t c, std::int64_t d,
                                              std::int64_t R2) {
  const double A = static_cast<double>(c * c + d * d);
  const double Bh = static_cast<double>(a0 * c + b0 * d);
  const double C = static_cast<double>(a0 * a0 + b0 * b0 - R2);
  const double disc = Bh * Bh - A * C;
  auto fits = [&](std::int64_t k) {
    const std::int64_t a = a0 + k * c, b = b0 + k * d;
    return a * a + b * b <= R2;
  };
  if (disc < 0.0) return {1, 0};
  const double s = std::sqrt(disc);
  std::int64_t lo = static_cast<std::int64_t>(std::ceil((-Bh - s) / A));
  std::int64_t hi = static_cast<std::int64_t>(std::floor((-Bh + s) / A));
  while (fits(lo - 1)) --lo;
  while (lo <= hi && !fits(lo)) ++lo;
  while (fits(hi + 1)) ++hi;
  while (hi >= lo && !fits(hi)) --hi;
  return {lo, hi};
}

V2 J(const V2& p) { return V2(-p[1], p[0]); }

// min { ||b - 1||_F : b in SL(2,R), b w = p }
double f_w(const V2& w, const V2& p) {
  const double pp = p.squaredNorm(), ww = w.squaredNorm();
  if (!(pp > 0.0)) return kInf;
  const V2 q0 = (ww / pp) * J(p);
  const double t = p.dot(J(w) - q0) / pp;
  const V2 q = q0 + t * p;
  return std::sqrt(((p - w).squaredNorm() + (q - J(w)).squaredNorm()) / ww);
}

// Nelder-Mead on R^2.
template <class F>
double nelder_mead(F f, V2 x0, double step, V2* argmin = nullptr) {
  std::array<V2, 3> s{x0, x0 + V2(step, 0), x0 + V2(0, step)};
  std::array<double, 3> v{f(s[0]), f(s[1]), f(s[2])};
  for (int it = 0; it < 4000; ++it) {
    std::array<int, 3> o{0, 1, 2};
    std::sort(o.begin(), o.end(), [&](int i, int j) { return v[i] < v[j]; });
    const int b = o[0], m = o[1], w = o[2];
    const double size = std::max((s[m] - s[b]).norm(), (s[w] - s[b]).norm());
    if (size < 1e-13 * (1.0 + s[b].norm())) break;
    const V2 c = 0.5 * (s[b] + s[m]);
    const V2 r = c + (c - s[w]);
    const double fr = f(r);
    if (fr < v[b]) {
      const V2 e = c + 2.0 * (c - s[w]);
      const double fe = f(e);
      if (fe < fr) s[w] = e, v[w] = fe;
      else s[w] = r, v[w] = fr;
    } else if (fr < v[m]) {
      s[w] = r, v[w] = fr;
    } else {
      const V2 k = fr < v[w] ? c + 0.5 * (r - c) : c + 0.5 * (s[w] - c);
      const double fk = f(k);
      if (fk < std::min(fr, v[w])) {
        s[w] = k, v[w] = fk;
      } else {
        for (int i : {m, w}) {
          s[i] = s[b] + 0.5 * (s[i] - s[b]);
          v[i] = f(s[i]);
        }
      }
    }
  }
  const int best = static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
  if (argmin) *argmin = s[best];
  return v[best];
}

V2 nilpotent_vector(const Covector& xi0) {
  const Mat2 N = xi0.to_algebra().matrix();
  if (std::abs(N.determinant()) > 1e-10 * N.squaredNorm() || std::abs(N.trace()) > 1e-10 * N.norm() || N.norm() == 0.0)
    throw ParameterError("xi0 must be a nonzero nilpotent covector");
  const V2 c0 = N.col(0), c1 = N.col(1);
  const V2 w = c0.norm() >= c1.norm() ? c0 : c1;
  return w / w.norm();
}

Mat2 unit_nilpotent(const Covector& xi0) {
  const Mat2 N = xi0.to_algebra().matrix();
  return N / N.norm();
}

}  // namespace

GroupMatrix IntMatrix::group() const {
  return GroupMatrix(static_cast<double>(a), static_cast<double>(b), static_cast<double>(c), static_cast<double>(d));
}

bool IntMatrix::operator<(const IntMatrix& o) const {
  return std::tie(a, b, c, d) < std::tie(o.a, o.b, o.c, o.d);
}

void for_each_lattice_element(double T, const std::function<void(const IntMatrix&)>& f) {
  if (!(T > 0.0)) throw ParameterError("lattice norm cutoff must be positive");
  if (T > kLatticeTMax) throw ParameterError("lattice norm cutoff above the cap of 5000");
  const std::int64_t R2 = norm_cap(T);
  const std::int64_t M = static_cast<std::int64_t>(std::floor(T));
  for (std::int64_t c = -M; c <= M; ++c) {
    for (std::int64_t d = -M; d <= M; ++d) {
      const std::int64_t cd = c * c + d * d;
      if (cd == 0 || cd + 1 > R2) continue;
      std::int64_t x, y;
      if (ext_gcd(c, d, x, y) != 1) continue;
      // c x + d y = 1, so (a, b) = (y, -x) has a d - b c = 1
      const auto [lo, hi] = k_range(y, -x, c, d, R2 - cd);
      for (std::int64_t k = lo; k <= hi; ++k) f(IntMatrix{y + k * c, -x + k * d, c, d});
    }
  }
}

long count_lattice(double T) {
  long n = 0;
  for_each_lattice_element(T, [&](const IntMatrix&) { ++n; });
  return n;
}

std::vector<IntMatrix> enumerate_lattice_int(double T) {
  std::vector<IntMatrix> out;
  for_each_lattice_element(T, [&](const IntMatrix& m) { out.push_back(m); });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<GroupMatrix> enumerate_lattice(double T) {
  std::vector<GroupMatrix> out;
  for (const IntMatrix& m : enumerate_lattice_int(T)) out.push_back(m.group());
  return out;
}

double PsiSpec::operator()(const GroupMatrix& h) const {
  return amplitude * standard_bump((h.matrix() - center.matrix()).norm() / radius);
}

double PsiSpec::norm_extent() const { return center.matrix().norm() + radius; }

nlohmann::json PackingReport::to_json() const {
  const Mat2& m = argmax.matrix();
  return {{"value", value},
          {"coarse", coarse},
          {"change", change},
          {"argmax", {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}},
          {"evaluations", evaluations},
          {"max_terms", max_terms}};
}

PackingReport packing_constant(const PsiSpec& psi, int n) {
  if (!(psi.radius > 0.0)) throw ParameterError("psi radius must be positive");
  const double ext = psi.norm_extent();
  if (ext > 10.0) throw ParameterError("psi support must lie in the norm ball of radius 10");
  if (n < 3) throw ParameterError("packing grid needs at least 3 points per axis");
  // g = h^{-1} with h = n_x a_y k_theta over the fundamental domain; for
  // y > ext^2 no translate reaches the support.
  const double y_max = ext * ext * 1.05 + 1.0;
  const double T_need = std::sqrt(y_max + 2.0) * ext * 1.01;
  const std::vector<IntMatrix> lat = enumerate_lattice_int(std::min(T_need, kLatticeTMax));
  std::vector<GroupMatrix> gam;
  gam.reserve(lat.size());
  for (const auto& m : lat) gam.push_back(m.group());

  PackingReport rep;
  auto sweep = [&](int m, double& best, GroupMatrix& arg) {
    if (m % 2 == 0) ++m;  // odd sizes keep x = 0 and theta = 0 on the grid
    for (int ix = 0; ix < m; ++ix) {
      const double x = -0.5 + static_cast<double>(ix) / (m - 1);
      const double y0 = std::sqrt(1.0 - x * x);
      for (int iy = 0; iy < m; ++iy) {
        const double y = y0 * std::pow(y_max / y0, static_cast<double>(iy) / (m - 1));
        for (int it = 0; it < m; ++it) {
          const double th = M_PI * it / m;
          const GroupMatrix h = GroupMatrix::unipotent(x) * GroupMatrix::diag(std::sqrt(y)) * GroupMatrix::rotation(th);
          const GroupMatrix g = h.inverse();
          const double lim = h.matrix().norm() * ext;
          double sum = 0.0;
          int terms = 0;
          for (const auto& gm : gam) {
            if (gm.matrix().norm() > lim) continue;
            const double v = psi(g * gm);
            if (v != 0.0) {
              sum += v;
              ++terms;
            }
          }
          ++rep.evaluations;
          rep.max_terms = std::max(rep.max_terms, terms);
          if (std::abs(sum) > best) {
            best = std::abs(sum);
            arg = g;
          }
        }
      }
    }
  };
  GroupMatrix a0, a1;
  sweep(n, rep.coarse, a0);
  sweep(2 * n - 1, rep.value, a1);
  if (rep.coarse > rep.value) {
    rep.value = rep.coarse;
    a1 = a0;
  }
  rep.argmax = a1;
  rep.change = rep.value > 0.0 ? (rep.value - rep.coarse) / rep.value : 0.0;
  return rep;
}

void TubeSpec::validate() const {
  if (!(rho > 0.0 && rho <= 0.5)) throw ParameterError("tube ball radius must lie in (0, 0.5]");
  if (!(T > 1.0)) throw ParameterError("tube norm cutoff must exceed 1");
  nilpotent_vector(xi0);
}

nlohmann::json TubeSpec::to_json() const {
  const Vec3 x = xi0.ortho();
  const Mat2& m = g.matrix();
  return {{"xi0", {x[0], x[1], x[2]}}, {"rho", rho}, {"g", {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}}, {"T", T}};
}

nlohmann::json TubeCount::to_json() const {
  return {{"pm_min", pm_min},
          {"pm_max", pm_max},
          {"mod_center_min", mod_center_min},
          {"mod_center_max", mod_center_max},
          {"ambiguous", ambiguous},
          {"tested", tested}};
}

double tube_margin(const TubeSpec& spec, const GroupMatrix& gamma) {
  const V2 w0 = nilpotent_vector(spec.xi0);
  const V2 v = spec.g.matrix() * w0;
  const Mat2 gi = gamma.inverse().matrix();
  double best = -kInf;
  for (double sg : {1.0, -1.0}) {
    auto F = [&](const V2& p) { return std::max(f_w(w0, sg * p), f_w(v, gi * p)); };
    double m = kInf;
    for (const V2& start : {V2(sg * w0), V2(gamma.matrix() * v), V2(0.5 * (sg * w0 + gamma.matrix() * v))}) {
      V2 arg;
      double val = nelder_mead(F, start, 0.5 * spec.rho, &arg);
      val = std::min(val, nelder_mead(F, arg, 0.05 * spec.rho));
      m = std::min(m, val);
    }
    best = std::max(best, spec.rho - m);
  }
  return best;
}

TubeCount tube_count(const TubeSpec& spec, double margin_tol) {
  spec.validate();
  const V2 w0 = nilpotent_vector(spec.xi0);
  const V2 v = spec.g.matrix() * w0;
  const double rho = spec.rho * (1.0 + 1e-9);
  TubeCount out;
  for_each_lattice_element(spec.T, [&](const IntMatrix& m) {
    const Mat2 G = m.group().matrix();
    const Mat2 Gi = m.group().inverse().matrix();
    const double n = G.norm();
    bool cand = false;
    for (double sg : {1.0, -1.0}) {
      if ((Gi * (sg * w0) - v).norm() <= rho * (v.norm() + n * w0.norm()) &&
          (G * v - sg * w0).norm() <= rho * (w0.norm() + n * v.norm()))
        cand = true;
    }
    if (!cand) return;
    ++out.tested;
    const double mg = tube_margin(spec, m.group());
    if (std::abs(mg) <= margin_tol * spec.rho) {
      ++out.ambiguous;
      ++out.pm_max;
    } else if (mg > 0.0) {
      ++out.pm_min;
      ++out.pm_max;
    }
  });
  out.mod_center_min = out.pm_min / 2;
  out.mod_center_max = (out.pm_max + 1) / 2;
  return out;
}

double ball_volume(double rho, int n) {
  if (!(rho > 0.0 && rho <= 0.5)) throw ParameterError("ball radius must lie in (0, 0.5]");
  const GaussRule& gl = gauss_legendre(n);
  const int nphi = 2 * n;
  double vol = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ct = gl.nodes[i], st = std::sqrt(1.0 - ct * ct);
    for (int j = 0; j < nphi; ++j) {
      const double ph = 2.0 * M_PI * j / nphi;
      const Vec3 om(st * std::cos(ph), st * std::sin(ph), ct);
      auto dist = [&](double t) {
        return (exp_map(AlgebraVector::from_ortho(t * om)).matrix() - Mat2::Identity()).norm();
      };
      double lo = 0.0, hi = 2.0 * rho;
      while (dist(hi) < rho) hi *= 1.5;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (lo + hi);
        (dist(m) < rho ? lo : hi) = m;
      }
      const double R = 0.5 * (lo + hi);
      double rad = 0.0;
      for (int k = 0; k < n; ++k) {
        const double t = 0.5 * R * (gl.nodes[k] + 1.0);
        rad += 0.5 * R * gl.weights[k] * t * t * haar_jacobian(AlgebraVector::from_ortho(t * om));
      }
      vol += gl.weights[i] * (2.0 * M_PI / nphi) * rad;
    }
  }
  return vol;
}

double fundamental_volume(int n) {
  // area(F) = int_{-1/2}^{1/2} int_0^{1/sqrt(1-x^2)} dt dx with t = 1/y
  const GaussRule& gl = gauss_legendre(n);
  double area = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = 0.5 * gl.nodes[i];
    const double top = 1.0 / std::sqrt(1.0 - x * x);
    double inner = 0.0;
    for (int k = 0; k < n; ++k) inner += 0.5 * top * gl.weights[k];
    area += 0.5 * gl.weights[i] * inner;
  }
  double theta = 0.0;  // K / {+-1}
  for (int k = 0; k < n; ++k) theta += M_PI / n;
  return area * theta / kSqrt2;
}

double stabilizer_volume(double T) {
  if (!(T * T > 2.0)) return 0.0;
  return 2.0 * std::sqrt(T * T - 2.0);
}

GroupMatrix generic_base_point() { return GroupMatrix((std::sqrt(5.0) - 1.0) / 2.0, -1.0, 1.0, 0.0); }

nlohmann::json CountReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& r : rows)
    rows_j.push_back({{"T", r.T},
                      {"C_T", r.C_T},
                      {"count_min", r.count_min},
                      {"count_max", r.count_max},
                      {"vol_S_T", r.vol_S_T},
                      {"vol_B", r.vol_B},
                      {"vol_X", r.vol_X},
                      {"ratio_min", r.ratio_min},
                      {"ratio_max", r.ratio_max}});
  return {{"rows", rows_j}, {"rho", rho}, {"vol_X_change", vol_X_change}};
}

std::string CountReport::csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "T,count_min,count_max,vol_S_T,vol_B,vol_X,ratio_min,ratio_max\n";
  for (const auto& r : rows)
    os << r.T << ',' << r.count_min << ',' << r.count_max << ',' << r.vol_S_T << ',' << r.vol_B << ',' << r.vol_X
       << ',' << r.ratio_min << ',' << r.ratio_max << '\n';
  return os.str();
}

CountReport ratner_ratio(const Covector& xi0, double rho, const GroupMatrix& g, const std::vector<double>& T_grid) {
  if (!(rho > 0.0 && rho <= 0.5)) throw ParameterError("ball radius must lie in (0, 0.5]");
  if (T_grid.empty()) throw ParameterError("empty T grid");
  const V2 w = nilpotent_vector(xi0);
  const Mat2 Nh = unit_nilpotent(xi0);
  const Mat2 Gm = g.matrix();
  const V2 x = Gm * w;
  const double vol_B = ball_volume(rho);
  const double vX1 = fundamental_volume(16), vX2 = fundamental_volume(32);
  CountReport rep;
  rep.rho = rho;
  rep.vol_X_change = std::abs(vX2 - vX1) / vX2;
  const double Tmax = *std::max_element(T_grid.begin(), T_grid.end());
  const double Umax = std::sqrt(std::max(0.0, Tmax * Tmax - 2.0));
  // gamma g s_u in B forces gamma x into the disk of radius rho around w and
  // ||gamma|| <= ||g^-1|| (sqrt2 + rho + Umax (1 + rho)).
  const double gnorm = std::max(Gm.norm(), 1.0) * (kSqrt2 + rho + Umax * (1.0 + rho)) + 1.0;
  const std::int64_t M = static_cast<std::int64_t>(std::ceil(gnorm));
  struct Hit {
    double ulo, uhi;
  };
  std::vector<Hit> hits;
  const double r = rho * (1.0 + 1e-12);
  for (std::int64_t c = -M; c <= M; ++c) {
    std::int64_t dlo = -M, dhi = M;
    if (std::abs(x[1]) > 1e-14) {
      const double e1 = (w[1] - r - c * x[0]) / x[1], e2 = (w[1] + r - c * x[0]) / x[1];
      dlo = std::max(dlo, static_cast<std::int64_t>(std::floor(std::min(e1, e2))));
      dhi = std::min(dhi, static_cast<std::int64_t>(std::ceil(std::max(e1, e2))));
    }
    for (std::int64_t d = dlo; d <= dhi; ++d) {
      if (std::abs(c * x[0] + d * x[1] - w[1]) > r) continue;
      std::int64_t p, q;
      if ((c == 0 && d == 0) || ext_gcd(c, d, p, q) != 1) continue;
      const std::int64_t a0 = q, b0 = -p;
      // top entry of gamma x: m0 + k eta must lie within r of w[0]
      const double m0 = a0 * x[0] + b0 * x[1], eta = c * x[0] + d * x[1];
      std::int64_t klo, khi;
      const double kspan = gnorm / std::max(1.0, std::sqrt(static_cast<double>(c * c + d * d))) + 2.0;
      const double kc = -static_cast<double>(a0 * c + b0 * d) / std::max<double>(1.0, c * c + d * d);
      klo = static_cast<std::int64_t>(std::floor(kc - kspan));
      khi = static_cast<std::int64_t>(std::ceil(kc + kspan));
      if (std::abs(eta) > 1e-14) {
        const double e1 = (w[0] - r - m0) / eta, e2 = (w[0] + r - m0) / eta;
        klo = std::max(klo, static_cast<std::int64_t>(std::floor(std::min(e1, e2))));
        khi = std::min(khi, static_cast<std::int64_t>(std::ceil(std::max(e1, e2))));
      }
      for (std::int64_t k = klo; k <= khi; ++k) {
        Mat2 Gam;
        Gam << static_cast<double>(a0 + k * c), static_cast<double>(b0 + k * d), static_cast<double>(c),
            static_cast<double>(d);
        const Mat2 P = Gam * Gm;
        if ((P * w - w).norm() > r) continue;
        // ||P + u P Nh - 1||^2 = A + 2 B u + C u^2 <= rho^2
        const Mat2 A0 = P - Mat2::Identity(), C0 = P * Nh;
        const double A = A0.squaredNorm(), B = (A0.array() * C0.array()).sum(), C = C0.squaredNorm();
        const double disc = B * B - C * (A - rho * rho);
        if (disc <= 0.0) continue;
        const double s = std::sqrt(disc);
        hits.push_back({(-B - s) / C, (-B + s) / C});
      }
    }
  }
  for (double T : T_grid) {
    ReturnRow row;
    row.T = T;
    const double U = std::sqrt(std::max(0.0, T * T - 2.0));
    for (const Hit& h : hits) {
      const double len = std::min(h.uhi, U) - std::max(h.ulo, -U);
      if (len > 0.0) {
        row.C_T += len;
        ++row.count_max;
        if (len > 1e-9 * rho) ++row.count_min;
      }
    }
    row.vol_S_T = stabilizer_volume(T);
    row.vol_B = vol_B;
    row.vol_X = vX2;
    const double norm = row.vol_S_T * vol_B / vX2;
    row.ratio_min = row.ratio_max = norm > 0.0 ? row.C_T / norm : 0.0;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace orbitlab
