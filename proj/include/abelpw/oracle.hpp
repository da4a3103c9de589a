#ifndef ABELPW_ORACLE_HPP
#define ABELPW_ORACLE_HPP

// Brute-force cross-check for the cycle search. Shares no integration code
// with flow/poincare: the piecewise-linear structure is exploited directly by
// propagating the closed-form linear solution across fixed panels, with all
// quadratures done by composite Gauss-Legendre of order 10 instead of
// adaptive stepping. Coefficients are accepted as arbitrary smooth
// 2pi-periodic callables, which also covers the literature example
// x' = eps cos(kt)|x| + sin t.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "common.hpp"
#include "flow.hpp"

namespace abelpw {

using CoefFn = std::function<double(double)>;

namespace oracle_detail {

// 10-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr double gauss_x[10] = {
    -0.9739065285171717, -0.8650633666889845, -0.6794095682990244,
    -0.4333953941292472, -0.1488743389816312, 0.1488743389816312,
    0.4333953941292472,  0.6794095682990244,  0.8650633666889845,
    0.9739065285171717};
inline constexpr double gauss_w[10] = {
    0.0666713443086881, 0.1494513491505806, 0.2190863625159820,
    0.2692667193099963, 0.2955242247147529, 0.2955242247147529,
    0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
    0.0666713443086881};

template <class F>
double gauss10(const F& f, double a, double b) {
  double mid = 0.5 * (a + b), hal = 0.5 * (b - a), s = 0.0;
  for (int i = 0; i < 10; ++i) s += gauss_w[i] * f(mid + hal * gauss_x[i]);
  return s * hal;
}

// Propagator of x' = sigma a(t) x + b(t) across one interval, computed on
// demand by nested quadrature: x(q) = alpha x(p) + beta.
inline void linear_coeffs(const CoefFn& a, const CoefFn& b, int sigma, double p,
                          double q, double* alpha, double* beta) {
  double Ia = gauss10(a, p, q);
  *alpha = std::exp(sigma * Ia);
  *beta = gauss10(
      [&](double s) { return b(s) * std::exp(sigma * gauss10(a, s, q)); }, p, q);
}

struct PanelTable {
  // closed-form linear propagation across each panel, for both signs
  std::vector<double> alpha_p, beta_p, alpha_m, beta_m, tgrid;
};

inline PanelTable build_table(const CoefFn& a, const CoefFn& b, double t0,
                              double t1, int panels) {
  PanelTable tab;
  tab.tgrid.resize(panels + 1);
  for (int i = 0; i <= panels; ++i)
    tab.tgrid[i] = t0 + (t1 - t0) * i / panels;
  tab.alpha_p.resize(panels);
  tab.beta_p.resize(panels);
  tab.alpha_m.resize(panels);
  tab.beta_m.resize(panels);
  for (int i = 0; i < panels; ++i) {
    linear_coeffs(a, b, +1, tab.tgrid[i], tab.tgrid[i + 1], &tab.alpha_p[i],
                  &tab.beta_p[i]);
    linear_coeffs(a, b, -1, tab.tgrid[i], tab.tgrid[i + 1], &tab.alpha_m[i],
                  &tab.beta_m[i]);
  }
  return tab;
}

// Value of the sign-sigma linear solution started at (p, xp), evaluated at
// tau (p <= tau <= q), by direct quadrature. Used only inside panels that
// contain a sign change.
inline double linear_at(const CoefFn& a, const CoefFn& b, int sigma, double p,
                        double xp, double tau) {
  double alpha, beta;
  linear_coeffs(a, b, sigma, p, tau, &alpha, &beta);
  return alpha * xp + beta;
}

inline int sign_for(const CoefFn& b, double t, double x) {
  if (x != 0.0) return x > 0 ? 1 : -1;
  double bv = b(t);
  if (bv != 0.0) return bv > 0 ? 1 : -1;
  // b(t) = 0 at the start point: probe just ahead
  double bv2 = b(t + 1e-7);
  return bv2 >= 0 ? 1 : -1;
}

// Advance through one panel, splitting at zero crossings of x.
inline double advance_panel(const CoefFn& a, const CoefFn& b,
                            const PanelTable& tab, int i, double x) {
  double p = tab.tgrid[i], q = tab.tgrid[i + 1];
  if (x != 0.0) {
    int sigma = x > 0 ? 1 : -1;
    double cand = sigma > 0 ? tab.alpha_p[i] * x + tab.beta_p[i]
                            : tab.alpha_m[i] * x + tab.beta_m[i];
    if (cand != 0.0 && (x > 0) == (cand > 0)) return cand;  // no crossing
  }
  // a crossing, or a start exactly at zero: resolve inside the panel by
  // following one linear branch at a time
  for (int guard = 0; guard < 8; ++guard) {
    int sigma = sign_for(b, p, x);
    double xq = linear_at(a, b, sigma, p, x, q);
    bool start_pos = sigma > 0;
    if (xq != 0.0 && (xq > 0) == start_pos) return xq;  // stayed on one side
    // first zero of this branch in (p, q)
    double lo = p, hi = q;
    for (int it = 0; it < 90 && hi - lo > 1e-15; ++it) {
      double mid = 0.5 * (lo + hi);
      double xm = linear_at(a, b, sigma, p, x, mid);
      if (xm != 0.0 && (xm > 0) == start_pos)
        lo = mid;
      else
        hi = mid;
    }
    if (hi >= q) return xq;
    p = hi;
    x = 0.0;
  }
  return linear_at(a, b, sign_for(b, p, x), p, x, q);
}

}  // namespace oracle_detail

struct BruteResult {
  int count = 0;
  std::vector<double> roots;  // initial values x0 of the periodic solutions
  bool suspected_continuum = false;
};

// Zeros of the displacement x -> u(2pi, 0, x) - x by dense sampling and
// bisection. Degree-1 restriction is lifted: a, b are arbitrary smooth
// 2pi-periodic callables.
inline BruteResult brute_count(const CoefFn& a, const CoefFn& b, double xlo,
                               double xhi, int grid = 4096, double tol = 1e-9,
                               int panels = 256) {
  using namespace oracle_detail;
  PanelTable tab = build_table(a, b, 0.0, two_pi, panels);
  auto displacement = [&](double x0) {
    double x = x0;
    for (int i = 0; i < panels; ++i) x = advance_panel(a, b, tab, i, x);
    return x - x0;
  };

  // Node layout: the default window grows like e^{2 pi max|a|}, so a uniform
  // grid can miss every cycle near x = 0. A sinh warp around the window
  // center keeps absolute resolution ~1e-3 near the center and ~2% relative
  // resolution at the far ends; for modest windows the warp degenerates to
  // uniform spacing.
  const double center = 0.5 * (xlo + xhi), half = 0.5 * (xhi - xlo);
  double warp = 0.0;
  {
    const double dx0 = 1e-3 * (1.0 + std::abs(center));
    const double target = 0.5 * grid * dx0;  // want half * s / sinh(s) = target
    if (half > target) {
      double lo_s = 1e-8, hi_s = 60.0;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo_s + hi_s);
        (half * mid / std::sinh(mid) > target ? lo_s : hi_s) = mid;
      }
      warp = 0.5 * (lo_s + hi_s);
    }
  }
  auto node = [&](int i) {
    double u = -1.0 + 2.0 * i / grid;
    return warp == 0.0 ? center + half * u
                       : center + half * std::sinh(warp * u) / std::sinh(warp);
  };

  std::vector<double> d(grid + 1);
  for (int i = 0; i <= grid; ++i) d[i] = displacement(node(i));
  auto ztol_at = [&](int i) { return tol * (1.0 + std::abs(node(i))); };

  BruteResult res;
  // continuum detection: runs of grid-dense near-zeros are flagged and
  // excluded from root extraction, but isolated zeros elsewhere still count
  // (a genuine band of periodic solutions can coexist with isolated cycles,
  // e.g. when the multiplier is 1 on a constant-sign range)
  std::vector<char> in_run(grid + 1, 0);
  for (int i = 0; i <= grid;) {
    if (std::abs(d[i]) >= ztol_at(i)) {
      ++i;
      continue;
    }
    int j = i;
    while (j <= grid && std::abs(d[j]) < ztol_at(j)) ++j;
    if (j - i >= 5) {
      res.suspected_continuum = true;
      for (int k = i; k < j; ++k) in_run[k] = 1;
    }
    i = j;
  }
  if (res.suspected_continuum && std::all_of(in_run.begin(), in_run.end(),
                                             [](char c) { return c != 0; }))
    return res;

  if (!in_run[0] && !in_run[grid] && std::abs(d[0]) >= ztol_at(0) &&
      std::abs(d[grid]) >= ztol_at(grid) && sgn(d[0]) == sgn(d[grid])) {
    // same strict sign at both ends: legal only if |d| diverges outward
    if (!(std::abs(d[0]) > std::abs(d[1]) &&
          std::abs(d[grid]) > std::abs(d[grid - 1])))
      throw WindowTooSmallError("brute_count: window ends do not bracket");
  }

  for (int i = 0; i < grid; ++i) {
    if (in_run[i] || in_run[i + 1]) continue;
    if (sgn(d[i]) * sgn(d[i + 1]) < 0) {
      double lo = node(i);
      double hi = node(i + 1);
      double vlo = d[i];
      for (int it = 0; it < 200 && hi - lo > tol * 1e-4 * (1 + std::abs(lo));
           ++it) {
        double mid = 0.5 * (lo + hi);
        double vm = displacement(mid);
        if (sgn(vm) == sgn(vlo)) {
          lo = mid;
          vlo = vm;
        } else {
          hi = mid;
        }
      }
      res.roots.push_back(0.5 * (lo + hi));
    } else if (std::abs(d[i]) < ztol_at(i) &&
               (i == 0 || std::abs(d[i]) <= std::abs(d[i - 1])) &&
               std::abs(d[i]) <= std::abs(d[i + 1])) {
      // isolated tangential zero at a grid point
      res.roots.push_back(node(i));
    }
  }
  // dedupe
  std::sort(res.roots.begin(), res.roots.end());
  std::vector<double> uniq;
  for (double r : res.roots)
    if (uniq.empty() || r - uniq.back() > 1e-6 * (1 + std::abs(r)))
      uniq.push_back(r);
  res.roots = uniq;
  res.count = (int)res.roots.size();
  return res;
}

inline BruteResult brute_count(const AbelEq& eq, double xlo, double xhi,
                               int grid = 4096, double tol = 1e-9) {
  return brute_count([&](double t) { return eq.a.eval(t); },
                     [&](double t) { return eq.b.eval(t); }, xlo, xhi, grid,
                     tol);
}

// Default window half-width from the a priori amplitude bound.
inline double brute_window(const CoefFn& a, const CoefFn& b) {
  double ma = 0.0, mb = 0.0;
  for (int i = 0; i < 512; ++i) {
    double t = two_pi * i / 512;
    ma = std::max(ma, std::abs(a(t)));
    mb = std::max(mb, std::abs(b(t)));
  }
  return two_pi * mb * std::exp(two_pi * ma);
}

inline BruteResult brute_count(const AbelEq& eq, int grid = 4096,
                               double tol = 1e-9) {
  double W = brute_window([&](double t) { return eq.a.eval(t); },
                          [&](double t) { return eq.b.eval(t); });
  return brute_count(eq, -W, W, grid, tol);
}

// Independent half-map, solved directly by quadrature and bisection from the
// zero-integral conditions: T+ makes int_{t1}^{t2} b exp(int_t^{t2} a) dt
// vanish (the solution is positive between t1 and t2), while T- makes
// int_{t2}^{t1+2pi} b exp(-int_t^{t1+2pi} a) dt vanish (the solution is
// negative between t2 and t1+2pi). Uses the closed-form primitive of the
// degree-1 coefficient a.
inline std::optional<double> brute_half_map(const AbelEq& eq, double t1,
                                            bool positive_side) {
  using namespace oracle_detail;
  const double tb = eq.tbar();
  if (!(t1 > 0.0 && t1 < tb)) return std::nullopt;
  auto prim = [&](double s) {
    return eq.a.c0 * s + eq.a.c1 * std::sin(s) - eq.a.c2 * std::cos(s);
  };
  auto G = [&](double t2) {
    double lo = positive_side ? t1 : t2;
    double hi = positive_side ? t2 : t1 + two_pi;
    double sigma = positive_side ? 1.0 : -1.0;
    auto f = [&](double s) {
      return eq.b.eval(s) * std::exp(sigma * (prim(hi) - prim(s)));
    };
    // composite Gauss-10
    const int M = 64;
    double acc = 0.0;
    for (int i = 0; i < M; ++i)
      acc += gauss10(f, lo + (hi - lo) * i / M, lo + (hi - lo) * (i + 1) / M);
    return acc;
  };
  const int S = 2000;
  double prev_t = tb + (two_pi - tb) * 1e-6, prev_v = G(prev_t);
  for (int i = 1; i <= S; ++i) {
    double t2 = tb + (two_pi - tb) * ((1.0 - 2e-6) * i / S + 1e-6);
    double v = G(t2);
    if (sgn(prev_v) * sgn(v) < 0) {
      double lo = prev_t, hi = t2, vlo = prev_v;
      while (hi - lo > 1e-13) {
        double mid = 0.5 * (lo + hi), vm = G(mid);
        if (sgn(vm) == sgn(vlo)) {
          lo = mid;
          vlo = vm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    if (v == 0.0) return t2;
    prev_t = t2;
    prev_v = v;
  }
  return std::nullopt;
}

}  // namespace abelpw

#endif  // ABELPW_ORACLE_HPP
