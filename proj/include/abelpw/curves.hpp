#ifndef ABELPW_CURVES_HPP
#define ABELPW_CURVES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "abelpw/common.hpp"
#include "abelpw/flow.hpp"
#include "abelpw/realroots.hpp"
#include "abelpw/trigpoly.hpp"

namespace abelpw {

// A solution of the tangency system in the (t, x) square, with residual
// diagnostics of the two defining curves.
struct CurvePoint {
  double t = 0.0, x = 0.0;
  double h_res = 0.0, m_res = 0.0;
};

// h(t,x) = 2 int_t^x a - 2 pi a0.
inline double h_eval(const AbelEq& eq, double t, double x) {
  return 2.0 * integrate(eq.a, t, x) - two_pi * eq.a.c0;
}

// m(t,x) = a(t) b(x) - a(x) b(t) e^{pi a0}.
inline double m_eval(const AbelEq& eq, double t, double x) {
  return eq.a.eval(t) * eq.b.eval(x) - eq.a.eval(x) * eq.b.eval(t) * eq.c();
}

// Harmonic expansion of 2 m / a0 for an equation with b in normalized
// position. Two coefficients differ from the source derivation, which has
// typos there; this form matches the direct definition identically.
inline double m_expansion(const AbelEq& eq, double t, double x) {
  const double c = eq.c(), r1 = eq.r1(), r2 = eq.r2(), b0 = eq.b0();
  return (c - 1.0) * (b0 * r2 - r1) * std::sin(x + t) +
         (c - 1.0) * (b0 * r1 + r2) * std::cos(x + t) +
         (c + 1.0) * (b0 * r2 + r1) * std::sin(x - t) +
         (c - 1.0) * (b0 * r1 - r2) * std::cos(x - t) +
         2.0 * (b0 * r2 - c) * std::sin(t) + 2.0 * b0 * (c + r1) * std::cos(t) -
         2.0 * (b0 * c * r2 - 1.0) * std::sin(x) - 2.0 * b0 * (c * r1 + 1.0) * std::cos(x) -
         2.0 * b0 * (c - 1.0);
}

// n(t) = (b0 r1 + b0) sin t + (1 - b0 r2) cos t + b0 r2 + r1, so that
// k'(t) = -n(t)/b(t)^2 for k = abar/b with b normalized.
inline double n_eval(const AbelEq& eq, double t) {
  const double r1 = eq.r1(), r2 = eq.r2(), b0 = eq.b0();
  return b0 * (r1 + 1.0) * std::sin(t) + (1.0 - b0 * r2) * std::cos(t) + b0 * r2 + r1;
}

// k(t) = abar(t)/b(t) with abar = a/a0 and b in normalized position.
inline double k_eval(const AbelEq& eq, double t) {
  const TrigPoly bn = normalized_b(eq.b0());
  const double bv = bn.eval(t);
  if (std::abs(bv) < 1e-12) throw DivisionNearZeroError("k_eval: b(t) near zero");
  return (1.0 + eq.r1() * std::cos(t) + eq.r2() * std::sin(t)) / bv;
}

// Along h = 0 in sum/difference coordinates z1 = t + x, z2 = x - t, the branch
// is the unique z2 in (0, 2 pi) with (pi - z2)/sin(z2/2) = 2 (r1 cos(z1/2) +
// r2 sin(z1/2)); the left side is strictly decreasing from +inf to -inf.
inline double h_zero_branch(const AbelEq& eq, double z1) {
  const double rhs = 2.0 * (eq.r1() * std::cos(z1 / 2.0) + eq.r2() * std::sin(z1 / 2.0));
  auto lhs = [](double z2) { return (pi - z2) / std::sin(z2 / 2.0); };
  double lo = 1e-12, hi = two_pi - 1e-12;
  if (lhs(lo) < rhs || lhs(hi) > rhs)
    throw OutOfRangeError("h_zero_branch: no solution in (0, 2pi)");
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    double mid = 0.5 * (lo + hi);
    if (lhs(mid) > rhs) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// (r1+1)((r1+1) b0^2 - 2 b0 r2 - r1 + 1): zero iff abar and the normalized b
// share a zero, which is exactly when f factors.
inline double common_zero_discriminant(double r1, double r2, double b0) {
  return (r1 + 1.0) * ((r1 + 1.0) * b0 * b0 - 2.0 * b0 * r2 - r1 + 1.0);
}

// Polynomial model of the tangency system under t = 2 atan(z1) + pi,
// x = 2 atan(z2) + pi: f is the degree-3 numerator of m/a0 (up to the factor
// 2/((1+z1^2)(1+z2^2))) and g the degree-9 numerator of
// n(t) b(x)^3 - n(x) b(t)^3 c^2.
template <class R = Real128>
struct RationalModel {
  BiPoly<R> f, g;
  double c = 1.0;

  static double t_of_z(double z) { return 2.0 * std::atan(z) + pi; }
  static double z_of_t(double t) { return std::tan((t - pi) / 2.0); }
};

template <class R = Real128>
RationalModel<R> rational_model(const AbelEq& eq) {
  const R c(eq.c());
  const R r1(eq.r1()), r2(eq.r2()), b0(eq.b0());

  // Numerators of the trig-linear factors over (1+z^2):
  //   abar -> (1-r1) - 2 r2 z + (1+r1) z^2
  //   b    -> 2 b0 - 2 z
  //   n    -> (2 b0 r2 + r1 - 1) - 2 b0 (r1+1) z + (r1+1) z^2
  std::vector<R> Na{R(1) - r1, -2 * r2, R(1) + r1};
  std::vector<R> Nb{2 * b0, R(-2)};
  std::vector<R> Nn{2 * b0 * r2 + r1 - 1, -2 * b0 * (r1 + 1), r1 + 1};

  RationalModel<R> rm;
  rm.c = eq.c();
  rm.f.coeff.assign(3, std::vector<R>(3, R{0}));
  for (int i = 0; i <= 2; ++i)
    for (int j = 0; j <= 1; ++j) {
      rm.f.coeff[i][j] += Na[i] * Nb[j] / 2;
      rm.f.coeff[j][i] -= c * Na[i] * Nb[j] / 2;
    }

  auto mul = [](const std::vector<R>& u, const std::vector<R>& v) {
    std::vector<R> w(u.size() + v.size() - 1, R{0});
    for (size_t i = 0; i < u.size(); ++i)
      for (size_t j = 0; j < v.size(); ++j) w[i + j] += u[i] * v[j];
    return w;
  };
  std::vector<R> one_z2{R(1), R(0), R(1)};
  std::vector<R> P = mul(mul(Nn, one_z2), one_z2);  // n-numerator * (1+z^2)^2
  std::vector<R> Q = mul(mul(Nb, Nb), Nb);          // b-numerator cubed
  rm.g.coeff.assign(7, std::vector<R>(7, R{0}));
  for (int i = 0; i <= 6; ++i)
    for (int j = 0; j <= 3; ++j) {
      rm.g.coeff[i][j] += P[i] * Q[j];
      rm.g.coeff[j][i] -= c * c * P[i] * Q[j];
    }
  return rm;
}

// Connected components of m = 0 on (0, 2pi)^2 by sign-grid contouring:
// crossing edges are linked through their cells (union-find), with the
// center-sample rule disambiguating saddle cells.
inline int count_components_m(const AbelEq& eq, int grid = 512) {
  if (eq.a.c0 == 0.0) throw DivisionNearZeroError("count_components_m: a0 = 0");
  const int N = grid;
  // m is 2pi-periodic in both variables, so the contouring runs on the torus:
  // the unbounded branch of the cubic model re-enters through the boundary
  // identification, and counting it as one curve is what makes the component
  // bound sharp. Samples are offset by half a cell so that no lattice point
  // hits the corners, where m vanishes exactly and rounding noise would
  // otherwise fabricate crossings.
  auto node = [&](int i) { return two_pi * (i + 0.5) / N; };
  std::vector<std::vector<double>> v(N, std::vector<double>(N));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      v[i][j] = m_eval(eq, node(i), node(j));

  auto sg = [](double x) { return x >= 0 ? 1 : -1; };
  auto wrap = [&](int i) { return i == N ? 0 : i; };
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (std::abs(v[i][j]) < 1e-13 && std::abs(v[wrap(i + 1)][j]) < 1e-13 &&
          std::abs(v[i][wrap(j + 1)]) < 1e-13 &&
          std::abs(v[wrap(i + 1)][wrap(j + 1)]) < 1e-13)
        throw DegenerateCurveError("count_components_m: cell-flat zero set");

  // Edge ids: horizontal (i,j)-(i+1,j) -> 2*(i*N+j), vertical
  // (i,j)-(i,j+1) -> 2*(i*N+j)+1, indices mod N.
  auto hid = [&](int i, int j) { return 2 * (wrap(i) * N + wrap(j)); };
  auto vid = [&](int i, int j) { return 2 * (wrap(i) * N + wrap(j)) + 1; };
  std::vector<int> parent(2 * N * N, -1);  // -1: edge not active
  auto find = [&](int u) {
    while (parent[u] != u) {
      parent[u] = parent[parent[u]];
      u = parent[u];
    }
    return u;
  };
  auto unite = [&](int u, int w) {
    if (parent[u] < 0) parent[u] = u;
    if (parent[w] < 0) parent[w] = w;
    u = find(u);
    w = find(w);
    if (u != w) parent[u] = w;
  };

  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      int s_sw = sg(v[i][j]), s_se = sg(v[wrap(i + 1)][j]);
      int s_nw = sg(v[i][wrap(j + 1)]), s_ne = sg(v[wrap(i + 1)][wrap(j + 1)]);
      // cell edges: S (i,j)-(i+1,j), N (i,j+1)-(i+1,j+1),
      //             W (i,j)-(i,j+1), E (i+1,j)-(i+1,j+1)
      bool S = s_sw != s_se, Nn_ = s_nw != s_ne, W = s_sw != s_nw, E = s_se != s_ne;
      int ids[4];
      int cnt = 0;
      if (S) ids[cnt++] = hid(i, j);
      if (E) ids[cnt++] = vid(i + 1, j);
      if (Nn_) ids[cnt++] = hid(i, j + 1);
      if (W) ids[cnt++] = vid(i, j);
      if (cnt == 2) {
        unite(ids[0], ids[1]);
      } else if (cnt == 4) {
        // saddle: one extra sample at the cell center decides the pairing
        double mc = m_eval(eq, (node(i) + node(i + 1)) / 2, (node(j) + node(j + 1)) / 2);
        if (sg(mc) == s_sw) {
          // sw corner connects to ne corner region: pair (S,W) with... the
          // curve separates sw/ne from se/nw: connect S-E and N-W
          unite(hid(i, j), vid(i + 1, j));
          unite(hid(i, j + 1), vid(i, j));
        } else {
          unite(hid(i, j), vid(i, j));
          unite(hid(i, j + 1), vid(i + 1, j));
        }
      }
    }

  std::vector<int> roots;
  for (int u = 0; u < (int)parent.size(); ++u)
    if (parent[u] >= 0) roots.push_back(find(u));
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return (int)roots.size();
}

struct TangencyReport {
  std::vector<CurvePoint> points;    // interior solutions, ordered by t
  std::vector<CurvePoint> boundary;  // region-boundary touches, reported apart
  bool partial = false;              // precision escalation exhausted
  bool generic = true;               // genericity preconditions held
  bool used_fallback = false;        // grid+Newton path taken
};

namespace detail {

// Tangency system in (t,x) coordinates for the normalized model:
// F1 = abar(t) b(x) - abar(x) b(t) c, F2 = n(t) b(x)^3 - n(x) b(t)^3 c^2.
struct TangencySystem {
  double r1, r2, b0, c;

  double abar(double s) const { return 1.0 + r1 * std::cos(s) + r2 * std::sin(s); }
  double dabar(double s) const { return -r1 * std::sin(s) + r2 * std::cos(s); }
  double b(double s) const { return std::sin(s) + b0 * (1.0 - std::cos(s)); }
  double db(double s) const { return std::cos(s) + b0 * std::sin(s); }
  double n(double s) const {
    return b0 * (r1 + 1.0) * std::sin(s) + (1.0 - b0 * r2) * std::cos(s) + b0 * r2 + r1;
  }
  double dn(double s) const {
    return b0 * (r1 + 1.0) * std::cos(s) - (1.0 - b0 * r2) * std::sin(s);
  }

  double F1(double t, double x) const { return abar(t) * b(x) - abar(x) * b(t) * c; }
  double F2(double t, double x) const {
    double bt = b(t), bx = b(x);
    return n(t) * bx * bx * bx - n(x) * bt * bt * bt * c * c;
  }
  void jac(double t, double x, double J[2][2]) const {
    J[0][0] = dabar(t) * b(x) - abar(x) * db(t) * c;
    J[0][1] = abar(t) * db(x) - dabar(x) * b(t) * c;
    double bt = b(t), bx = b(x);
    J[1][0] = dn(t) * bx * bx * bx - 3.0 * n(x) * bt * bt * db(t) * c * c;
    J[1][1] = 3.0 * n(t) * bx * bx * db(x) - dn(x) * bt * bt * bt * c * c;
  }
};

inline bool in_region(double t, double x, double tb, double margin, bool* on_boundary) {
  double d = std::min({t, tb - t, x - tb, two_pi - x, x - t, two_pi - (x - t),
                       t + x - tb, tb + two_pi - (t + x)});
  *on_boundary = std::abs(d) <= margin;
  return d > margin;
}

}  // namespace detail

// Dense-grid Newton solver for the tangency system; independent of the
// elimination pipeline and used to cross-check it.
inline std::vector<CurvePoint> tangency_newton_from_grid(const AbelEq& eq, int grid = 96) {
  detail::TangencySystem S{eq.r1(), eq.r2(), eq.b0(), eq.c()};
  const double tb = eq.tbar();
  std::vector<CurvePoint> out;
  for (int i = 1; i < grid; ++i)
    for (int j = 1; j < grid; ++j) {
      double t = two_pi * i / grid, x = two_pi * j / grid;
      bool ok = false;
      for (int it = 0; it < 30; ++it) {
        double f1 = S.F1(t, x), f2 = S.F2(t, x);
        if (std::abs(f1) + std::abs(f2) < 1e-11) { ok = true; break; }
        double J[2][2];
        S.jac(t, x, J);
        double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
        if (std::abs(det) < 1e-14) break;
        double dt = (f1 * J[1][1] - f2 * J[0][1]) / det;
        double dx = (f2 * J[0][0] - f1 * J[1][0]) / det;
        if (std::abs(dt) > 0.5 || std::abs(dx) > 0.5) break;
        t -= dt;
        x -= dx;
      }
      if (!ok) continue;
      // b vanishes on the lines t,x in {0, tbar, 2pi}, where the whole system
      // degenerates to zero; keep a safe distance so pseudo-roots there are
      // not mistaken for solutions.
      bool on_b = false;
      if (!detail::in_region(t, x, tb, 1e-4, &on_b)) continue;
      bool dup = false;
      for (auto& p : out)
        if (std::abs(p.t - t) < 1e-6 && std::abs(p.x - x) < 1e-6) dup = true;
      if (!dup) out.push_back({t, x, h_eval(eq, t, x), m_eval(eq, t, x)});
    }
  std::sort(out.begin(), out.end(),
            [](const CurvePoint& u, const CurvePoint& v) { return u.t < v.t; });
  return out;
}

namespace detail {

// Reverse a BiPoly in its z1 exponent (z1 -> 1/w up to a power of w).
template <class R>
BiPoly<R> reverse_z1(const BiPoly<R>& p) {
  int d1 = 0;
  for (int i = 0; i < (int)p.coeff.size(); ++i)
    for (auto& cij : p.coeff[i])
      if (cij != 0) d1 = std::max(d1, i);
  BiPoly<R> q;
  q.coeff.assign(d1 + 1, std::vector<R>(p.coeff.empty() ? 0 : p.coeff[0].size(), R{0}));
  for (int i = 0; i <= d1; ++i) q.coeff[i] = p.coeff[d1 - i];
  return q;
}

template <class R>
bool solve_tangency_prec(const AbelEq& eq, TangencyReport& rep) {
  RationalModel<R> rm = rational_model<R>(eq);
  // The resultant coefficients come from interpolation at radius-1 Chebyshev
  // nodes, so evaluation is only trustworthy on [-1,1]: coefficient noise is
  // amplified by |z1|^deg outside. Roots with |z1| <= 1 come from the direct
  // resultant; roots with |z1| >= 1 from the z1 -> 1/w reversal, whose own
  // resultant is again only ever evaluated on [-1,1].
  UniPoly<R> res = resultant(rm.f, rm.g, Eliminate::z2);
  if (res.is_zero()) return false;
  UniPoly<R> res_rev =
      resultant(reverse_z1(rm.f), reverse_z1(rm.g), Eliminate::z2);
  if (res_rev.is_zero()) return false;

  auto inner = isolate_and_refine(res, R{-1}, R{1}, R("1e-30"));
  auto outer = isolate_and_refine(res_rev, R{-1}, R{1}, R("1e-30"));

  // Multiple roots break the genericity contract. The reversal picks up a
  // spurious root at w = 0 whenever the direct resultant drops degree, so
  // only w != 0 counts there.
  for (auto& r : inner)
    if (r.mult > 1) {
      rep.generic = false;
      return false;
    }
  for (auto& r : outer)
    if (r.mult > 1 && abs(r.x) > R("1e-12")) {
      rep.generic = false;
      return false;
    }

  std::vector<RootWithMult<R>> z1s = inner;
  for (auto& r : outer) {
    if (abs(r.x) < R("1e-9")) continue;  // |z1| > 1e9: boundary-glued in t
    R z1 = 1 / r.x;
    bool dup = false;
    for (auto& s : z1s)
      if (abs(s.x - z1) < R("1e-9") * (1 + abs(z1))) dup = true;
    if (!dup) z1s.push_back({z1, r.mult});
  }

  R gscale{0};
  for (auto& row : rm.g.coeff)
    for (auto& cij : row) gscale = std::max(gscale, R(abs(cij)));

  R fscale{0};
  for (auto& row : rm.f.coeff)
    for (auto& cij : row) fscale = std::max(fscale, R(abs(cij)));

  // Partial derivatives for the bivariate Newton polish below.
  auto d_z1 = [](const BiPoly<R>& p) {
    BiPoly<R> d;
    if (p.coeff.size() <= 1) {
      d.coeff.assign(1, std::vector<R>(p.coeff.empty() ? 1 : p.coeff[0].size(), R{0}));
      return d;
    }
    d.coeff.assign(p.coeff.size() - 1, {});
    for (size_t i = 1; i < p.coeff.size(); ++i) {
      d.coeff[i - 1] = p.coeff[i];
      for (auto& cij : d.coeff[i - 1]) cij *= R((int)i);
    }
    return d;
  };
  auto d_z2 = [](const BiPoly<R>& p) {
    BiPoly<R> d = p;
    for (auto& row : d.coeff) {
      if (row.size() <= 1) {
        row.assign(1, R{0});
        continue;
      }
      for (size_t j = 1; j < row.size(); ++j) row[j - 1] = row[j] * R((int)j);
      row.pop_back();
    }
    return d;
  };
  BiPoly<R> f1 = d_z1(rm.f), f2 = d_z2(rm.f), g1 = d_z1(rm.g), g2 = d_z2(rm.g);

  const double tb = eq.tbar();
  for (auto& root : z1s) {
    UniPoly<R> fz = rm.f.at_z1(root.x);  // quadratic in z2
    std::vector<R> z2s;
    if (fz.degree() >= 2) {
      R A = fz.c[2], B = fz.c[1], C = fz.c[0];
      R disc = B * B - 4 * A * C;
      if (disc >= 0) {
        R sq = sqrt(disc);
        // numerically stable pair
        R q = B >= 0 ? (-B - sq) / 2 : (-B + sq) / 2;
        z2s.push_back(q / A);
        if (q != 0) z2s.push_back(C / q);
      }
    } else if (fz.degree() == 1) {
      z2s.push_back(-fz.c[0] / fz.c[1]);
    }
    for (auto& z2c : z2s) {
      // The resultant coefficients carry interpolation round-off, so the raw
      // candidates are good to ~1e-14 only. A few Newton steps on (f, g)
      // sharpen true common roots to working precision and leave mismatched
      // quadratic partners with O(1) scaled residuals, which separates them
      // cleanly.
      R u = root.x, w = z2c;
      for (int it = 0; it < 60; ++it) {
        R fv = rm.f.eval(u, w), gv = rm.g.eval(u, w);
        R a11 = f1.eval(u, w), a12 = f2.eval(u, w);
        R a21 = g1.eval(u, w), a22 = g2.eval(u, w);
        R det = a11 * a22 - a12 * a21;
        if (det == 0) break;
        R du = (fv * a22 - gv * a12) / det, dw = (gv * a11 - fv * a21) / det;
        u -= du;
        w -= dw;
        if (abs(du) < R("1e-30") * (1 + abs(u)) && abs(dw) < R("1e-30") * (1 + abs(w)))
          break;
      }
      // Reject drifted iterates and mismatched pairs by scaled residuals.
      R sf = fscale * (1 + u * u) * (1 + w * w);
      R sg = gscale * pow(1 + u * u, 3) * pow(1 + w * w, 3);
      if (abs(u - root.x) > R("1e-6") * (1 + abs(root.x))) continue;
      if (abs(rm.f.eval(u, w)) > sf * R("1e-25") ||
          abs(rm.g.eval(u, w)) > sg * R("1e-25"))
        continue;
      double t = RationalModel<R>::t_of_z((double)u);
      double x = RationalModel<R>::t_of_z((double)w);
      bool on_b = false;
      bool interior = in_region(t, x, tb, 1e-9, &on_b);
      if (!interior && !on_b) continue;
      CurvePoint p{t, x, h_eval(eq, t, x), m_eval(eq, t, x)};
      auto& dst = interior ? rep.points : rep.boundary;
      bool dup = false;
      for (auto& q : dst)
        if (std::abs(q.t - t) < 1e-9 && std::abs(q.x - x) < 1e-9) dup = true;
      if (!dup) dst.push_back(p);
    }
  }
  std::sort(rep.points.begin(), rep.points.end(),
            [](const CurvePoint& u, const CurvePoint& v) { return u.t < v.t; });
  return true;
}

}  // namespace detail

// Solve the tangency system f = g = 0: resultant elimination of z2,
// Sturm-certified real-root isolation of the degree-<=27 resultant,
// back-substitution through the quadratic f(z1, .), and region filtering.
// Escalates 128 -> 256-bit precision on ambiguous Sturm signs; non-generic
// parameters fall back to the grid+Newton solver.
inline TangencyReport solve_tangency(const AbelEq& eq) {
  TangencyReport rep;
  double disc = 0.0;
  try {
    disc = common_zero_discriminant(eq.r1(), eq.r2(), eq.b0());
  } catch (const DivisionNearZeroError&) {
    rep.generic = false;
  }
  if (std::abs(eq.a.c0) <= 1e-3 || std::abs(disc) <= 1e-6) rep.generic = false;

  if (rep.generic) {
    try {
      if (detail::solve_tangency_prec<Real128>(eq, rep)) return rep;
    } catch (const AmbiguousSignError&) {
      rep = TangencyReport{};
      try {
        if (detail::solve_tangency_prec<Real256>(eq, rep)) return rep;
      } catch (const AmbiguousSignError&) {
        rep = TangencyReport{};
        rep.partial = true;
      }
    }
  }
  if (std::abs(eq.a.c0) <= 1e-3)
    throw IllConditionedError("solve_tangency: a0 too small for the normalized model");
  rep.used_fallback = true;
  rep.points = tangency_newton_from_grid(eq);
  return rep;
}

}  // namespace abelpw

#endif
