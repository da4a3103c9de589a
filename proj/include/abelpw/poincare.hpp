#ifndef ABELPW_POINCARE_HPP
#define ABELPW_POINCARE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "abelpw/centers.hpp"
#include "abelpw/common.hpp"
#include "abelpw/flow.hpp"
#include "abelpw/trigpoly.hpp"

namespace abelpw {

// A = e^{2*pi*a0}; B from eq:AB by adaptive quadrature; barred pair for the
// negative branch (a -> -a).
struct LinearConstants {
  double A, B, Abar, Bbar;
};

inline LinearConstants linear_constants(const AbelEq& eq) {
  LinearConstants lc;
  lc.A = std::exp(two_pi * eq.a0());
  lc.Abar = std::exp(-two_pi * eq.a0());
  auto up = [&eq](double s) {
    return eq.b.eval(s) * std::exp(integrate(eq.a, s, two_pi));
  };
  auto dn = [&eq](double s) {
    return eq.b.eval(s) * std::exp(-integrate(eq.a, s, two_pi));
  };
  lc.B = eq.b.is_zero() ? 0.0 : adaptive_quadrature(up, 0.0, two_pi, 1e-13);
  lc.Bbar = eq.b.is_zero() ? 0.0 : adaptive_quadrature(dn, 0.0, two_pi, 1e-13);
  return lc;
}

// d(x) = u(2*pi, 0, x) - x.
inline double displacement(const AbelEq& eq, double x, const Tolerances& tol = {}) {
  return integrate_flow(eq, 0.0, x, two_pi, tol).u_end - x;
}

enum class Side { plus, minus };

// Poincare half-maps of a normalized equation. T+ follows the solution pinned
// at u(t1) = 0 forward to its first zero in (tbar, 2*pi); T- follows the
// solution pinned at u(t1 + 2*pi) = 0 backward to its last zero there.
inline std::optional<double> half_map(const AbelEq& eq, double t1, Side side,
                                      const Tolerances& tol = {}) {
  const double tb = eq.tbar();
  if (side == Side::plus) {
    Trajectory tr = integrate_flow(eq, t1, 0.0, two_pi, tol);
    for (const auto& cr : tr.crossings)
      if (cr.t > tb - 1e-12) return cr.t;
    return std::nullopt;
  }
  Trajectory tr = integrate_flow(eq, t1 + two_pi, 0.0, tb, tol);
  for (const auto& cr : tr.crossings)
    if (cr.t < two_pi + 1e-12 && cr.t > tb - 1e-12) return cr.t;
  return std::nullopt;
}

// Residual of the ODE satisfied by T+ (eq:f) or T- (eq:g), with dT/dt by
// central finite difference. Test probe; ~0 when the maps are computed right.
inline double half_map_derivative_residual(const AbelEq& eq, double t1,
                                           Side side = Side::plus,
                                           const Tolerances& tol = {}) {
  auto T0 = half_map(eq, t1, side, tol);
  if (!T0) return std::numeric_limits<double>::quiet_NaN();
  // The map can be very steep, so no single finite-difference step suits all
  // probes: walk a ladder of steps, Richardson-extrapolate adjacent pairs, and
  // keep the pair that agrees best with its own extrapolation.
  constexpr int K = 5;
  double D[K];
  bool okv[K];
  double h = 1e-3;
  for (int k = 0; k < K; ++k, h /= 4.0) {
    auto Tm = half_map(eq, t1 - h, side, tol);
    auto Tp = half_map(eq, t1 + h, side, tol);
    okv[k] = Tm.has_value() && Tp.has_value();
    D[k] = okv[k] ? (*Tp - *Tm) / (2.0 * h) : 0.0;
  }
  double dT = std::numeric_limits<double>::quiet_NaN();
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k + 1 < K; ++k) {
    if (!okv[k] || !okv[k + 1]) continue;
    double R = (16.0 * D[k + 1] - D[k]) / 15.0;
    double err = std::abs(R - D[k + 1]);
    if (err < best) { best = err; dT = R; }
  }
  if (std::isnan(dT)) {
    for (int k = K - 1; k >= 0; --k)
      if (okv[k]) { dT = D[k]; break; }
    if (std::isnan(dT)) return dT;
  }
  if (side == Side::plus)
    return eq.b.eval(*T0) * dT - eq.b.eval(t1) * std::exp(integrate(eq.a, t1, *T0));
  return eq.b.eval(*T0) * dT - eq.b.eval(t1) * std::exp(-integrate(eq.a, t1 + two_pi, *T0));
}

enum class SignClass { positive, negative, sign_changing };

struct Cycle {
  double x0;                 // value at t = 0
  SignClass sign_class;
  std::optional<std::pair<double, double>> crossings;  // (t1, t2), normalized time
  double mult = 1.0;
  bool hyperbolic = false;
};

struct SearchConfig {
  int grid = 512;            // Delta(t) bracket grid on (eps, tbar - eps)
  double eps = 1e-4;
  double abs_tol = 1e-9;     // |d(x0)| validation
  double sep_tol = 1e-7;
  double mult_tol = 1e-6;
  int center_probe = 32;
  double center_tol = 1e-9;
  double tangent_tol = 1e-7; // |Delta| local-min threshold for tangential cycles
  Tolerances ode;
};

enum class ReportKind { finite, center };

struct CycleReport {
  ReportKind kind = ReportKind::finite;
  std::vector<Cycle> cycles;
  CenterClass center_class;      // when kind == center
  bool suspected_center = false; // numerically zero but not algebraically certified
  std::vector<std::string> warnings;
};

inline Cycle classify_cycle(const AbelEq& eq, Cycle cyc, const SearchConfig& cfg = {}) {
  Trajectory tr = integrate_flow(eq, 0.0, cyc.x0, two_pi, cfg.ode);
  cyc.mult = multiplier(eq, tr);
  cyc.hyperbolic = std::abs(cyc.mult - 1.0) >= cfg.mult_tol;
  return cyc;
}

namespace detail {

inline void add_cycle(std::vector<Cycle>& out, const Cycle& c, double sep_tol) {
  for (const auto& e : out)
    if (std::abs(e.x0 - c.x0) <= sep_tol) return;
  out.push_back(c);
}

}  // namespace detail

// Full cycle search: constant-sign cycles from the linear displacement
// formulas, sign-changing cycles from root isolation of
// Delta(t) = T+(t) - T-(t) on the normalized equation, center detection via
// a displacement probe confirmed by the algebraic criterion.
inline CycleReport find_cycles(const AbelEq& eq, const SearchConfig& cfg = {}) {
  CycleReport rep;
  const LinearConstants lc = linear_constants(eq);
  const double W = eq.cycle_window();

  // b identically zero: x = 0 is a solution; everything else is linear.
  if (eq.b.is_zero()) {
    if (std::abs(eq.a0()) < 1e-14) {
      rep.kind = ReportKind::center;
      rep.center_class = detect_center(eq);
      return rep;
    }
    Cycle zero{0.0, SignClass::positive, std::nullopt, lc.A,
               std::abs(lc.A - 1.0) >= cfg.mult_tol ||
                   std::abs(lc.Abar - 1.0) >= cfg.mult_tol};
    rep.cycles.push_back(zero);
    return rep;
  }

  // Center probe.
  double max_d = 0.0;
  const double Wp = eq.probe_window();
  for (int i = 0; i < cfg.center_probe; ++i) {
    double x = -Wp + (2.0 * Wp) * (i + 0.5) / cfg.center_probe;
    max_d = std::max(max_d, std::abs(displacement(eq, x, cfg.ode)));
  }
  CenterClass cc = detect_center(eq);
  if (max_d < cfg.center_tol) {
    rep.kind = ReportKind::center;
    rep.center_class = cc;
    rep.suspected_center = (cc.kind == CenterKind::none);
    if (rep.suspected_center)
      rep.warnings.push_back("suspected center: displacement numerically zero but "
                             "algebraic criterion not met");
    return rep;
  }
  if (cc.kind != CenterKind::none) {
    // Linear center: a continuum on one side; report as center.
    rep.kind = ReportKind::center;
    rep.center_class = cc;
    return rep;
  }

  // Constant-sign cycles from fixed points of the linear maps, sign
  // consistency re-validated by integration. While the orbit stays on one
  // branch the system is exactly linear, so the closed-form fixed point is
  // exact; the residual check only guards the sign determination, and its
  // tolerance must absorb the integrator's error amplification ~ e^{int |a|}
  // (the multiplier can reach e^{2 pi max|a|} even when the orbit itself
  // stays small).
  const double amp = std::exp(
      adaptive_quadrature([&eq](double s) { return std::abs(eq.a.eval(s)); },
                          0.0, two_pi, 1e-10));
  if (std::abs(lc.A - 1.0) > 1e-12) {
    double xp = lc.B / (1.0 - lc.A);
    if (std::abs(xp) <= W) {
      Trajectory tr = integrate_flow(eq, 0.0, xp, two_pi, cfg.ode);
      double mn = xp, umax = std::abs(xp);
      for (auto& s : tr.samples) {
        mn = std::min(mn, s.second);
        umax = std::max(umax, std::abs(s.second));
      }
      if (mn > -1e-9 && std::abs(tr.u_end - xp) < cfg.abs_tol * (1.0 + umax) * amp)
        detail::add_cycle(rep.cycles,
                          classify_cycle(eq, {xp, SignClass::positive, {}, 0, false}, cfg),
                          cfg.sep_tol);
    }
  }
  if (std::abs(lc.Abar - 1.0) > 1e-12) {
    double xn = lc.Bbar / (1.0 - lc.Abar);
    if (std::abs(xn) <= W) {
      Trajectory tr = integrate_flow(eq, 0.0, xn, two_pi, cfg.ode);
      double mx = xn, umax = std::abs(xn);
      for (auto& s : tr.samples) {
        mx = std::max(mx, s.second);
        umax = std::max(umax, std::abs(s.second));
      }
      if (mx < 1e-9 && std::abs(tr.u_end - xn) < cfg.abs_tol * (1.0 + umax) * amp)
        detail::add_cycle(rep.cycles,
                          classify_cycle(eq, {xn, SignClass::negative, {}, 0, false}, cfg),
                          cfg.sep_tol);
    }
  }

  // Sign-changing cycles need b to change sign.
  NormalizedForm nf;
  try {
    nf = normalize(eq.a, eq.b);
  } catch (const NoSignChangeError&) {
    std::sort(rep.cycles.begin(), rep.cycles.end(),
              [](const Cycle& a, const Cycle& b) { return a.x0 < b.x0; });
    return rep;  // only the linear analysis applies
  }
  const AbelEq neq = normalized_eq(nf);
  const double tb = nf.tbar;

  auto delta = [&](double t) -> std::optional<double> {
    auto tp = half_map(neq, t, Side::plus, cfg.ode);
    if (!tp) return std::nullopt;
    auto tm = half_map(neq, t, Side::minus, cfg.ode);
    if (!tm) return std::nullopt;
    return *tp - *tm;
  };

  // Map a normalized root t1 (u(t1)=0) back to a cycle of the input equation.
  auto make_cycle = [&](double t1) -> std::optional<Cycle> {
    auto t2 = half_map(neq, t1, Side::plus, cfg.ode);
    if (!t2) return std::nullopt;
    // Normalized time s0 corresponding to original t = 0.
    double s0 = std::fmod(two_pi - nf.time_shift, two_pi);
    Trajectory tr = integrate_flow(neq, t1, 0.0, t1 + two_pi, cfg.ode);
    // Evaluate the periodic normalized solution at s0 (shift into [t1, t1+2pi)).
    double s_eval = s0 < t1 ? s0 + two_pi : s0;
    double u_s0 = integrate_flow(neq, t1, 0.0, s_eval, cfg.ode).u_end;
    double x0 = nf.x_scale * u_s0;
    // The Delta root is accurate in t, but strongly hyperbolic cycles amplify
    // the residual in x; polish with Newton on the displacement map.
    double d0 = displacement(eq, x0, cfg.ode);
    for (int it = 0; it < 8 && std::abs(d0) > 1e-13 * (1.0 + std::abs(x0)); ++it) {
      double h = 1e-6 * (1.0 + std::abs(x0));
      double der = (displacement(eq, x0 + h, cfg.ode) -
                    displacement(eq, x0 - h, cfg.ode)) / (2.0 * h);
      if (std::abs(der) < 1e-12) break;
      double step = d0 / der;
      if (std::abs(step) > 1e-4 * (1.0 + std::abs(x0))) break;  // don't hop roots
      x0 -= step;
      d0 = displacement(eq, x0, cfg.ode);
    }
    // Validate in normalized time: t1 must actually be a root of Delta. The
    // x-space residual is not a reliable gate here -- strong hyperbolicity
    // amplifies the integrator noise by up to e^{int |a|} -- whereas Delta is
    // O(1)-conditioned. This also filters the edge-hunt fallback, which may
    // return a domain-edge point that is not a root.
    auto dchk = delta(t1);
    if (!dchk || std::abs(*dchk) > 1e-6) return std::nullopt;
    Cycle c{x0, SignClass::sign_changing, std::make_pair(t1, *t2), 0, false};
    return classify_cycle(eq, c, cfg);
  };

  const int N = cfg.grid;
  std::vector<std::optional<double>> dv(N + 1);
  std::vector<double> ts(N + 1);
  for (int i = 0; i <= N; ++i) {
    ts[i] = cfg.eps + (tb - 2.0 * cfg.eps) * i / N;
    dv[i] = delta(ts[i]);
  }
  // Delta's domain can end inside a cell (T+ or T- ceases to exist when the
  // return solution turns tangent), and roots can sit flush against such an
  // edge or in a sliver of the domain between two edges. The two hunts below
  // recurse into each other: root bisection falls back to edge hunting when it
  // steps onto undefined ground, and edge hunting spawns a root bisection when
  // it uncovers an interior sign change.
  std::function<std::optional<double>(double, double, double, double, int)> root_hunt;
  std::function<std::optional<double>(double, double, bool, double, double, int)> edge_hunt;
  root_hunt = [&](double lo, double va, double hi, double vb,
                  int depth) -> std::optional<double> {
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
      double mid = 0.5 * (lo + hi);
      auto vm = delta(mid);
      if (!vm) {
        if (depth >= 4) return std::nullopt;
        if (auto r = edge_hunt(lo, mid, true, lo, va, depth + 1)) return r;
        return edge_hunt(mid, hi, false, hi, vb, depth + 1);
      }
      if (sgn(*vm) == sgn(va) || *vm == 0.0) { lo = mid; va = *vm; }
      else { hi = mid; vb = *vm; }
    }
    // The midpoint can land on an undefined sliver; fall back to the better
    // bracket endpoint, where Delta is known to be defined.
    double mid = 0.5 * (lo + hi);
    if (delta(mid)) return mid;
    return std::abs(va) < std::abs(vb) ? lo : hi;
  };
  edge_hunt = [&](double lo, double hi, bool left_def, double t_def, double v_def,
                  int depth) -> std::optional<double> {
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
      double mid = 0.5 * (lo + hi);
      auto vm = delta(mid);
      if (vm && sgn(*vm) * sgn(v_def) < 0) {
        if (depth >= 4) return mid;
        return t_def < mid ? root_hunt(t_def, v_def, mid, *vm, depth + 1)
                           : root_hunt(mid, *vm, t_def, v_def, depth + 1);
      }
      if (vm) {
        (left_def ? lo : hi) = mid;
        t_def = mid;
        v_def = *vm;
      } else {
        (left_def ? hi : lo) = mid;
      }
    }
    // No interior sign change: the root, if any, hugs the domain edge;
    // make_cycle re-validates the displacement residual, so a miss is
    // filtered out.
    return t_def;
  };

  for (int i = 0; i < N; ++i) {
    if ((bool)dv[i] != (bool)dv[i + 1]) {
      bool left_def = (bool)dv[i];
      auto root = edge_hunt(ts[i], ts[i + 1], left_def,
                            left_def ? ts[i] : ts[i + 1],
                            left_def ? *dv[i] : *dv[i + 1], 0);
      if (root)
        if (auto c = make_cycle(*root)) detail::add_cycle(rep.cycles, *c, cfg.sep_tol);
      continue;
    }
    if (!dv[i] || !dv[i + 1]) continue;
    double da = *dv[i], db = *dv[i + 1];
    if (sgn(da) * sgn(db) < 0) {
      auto root = root_hunt(ts[i], da, ts[i + 1], db, 0);
      if (!root) {
        rep.warnings.push_back("unresolved root of Delta near t=" + std::to_string(ts[i]));
        continue;
      }
      if (auto c = make_cycle(*root))
        detail::add_cycle(rep.cycles, *c, cfg.sep_tol);
      else
        rep.warnings.push_back("unresolved root of Delta near t=" + std::to_string(*root));
    } else if (i > 0 && dv[i - 1] && std::abs(da) < cfg.tangent_tol &&
               std::abs(da) <= std::abs(*dv[i - 1]) && std::abs(da) <= std::abs(db)) {
      // Tangential (even-multiplicity) candidate: local minimum of |Delta|.
      double t_min = ts[i], d_min = std::abs(da);
      double lo = ts[i - 1], hi = ts[i + 1];
      for (int it = 0; it < 40; ++it) {
        double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        auto v1 = delta(m1), v2 = delta(m2);
        if (!v1 || !v2) break;
        if (std::abs(*v1) < std::abs(*v2)) hi = m2; else lo = m1;
        double tm = 0.5 * (lo + hi);
        auto vm = delta(tm);
        if (vm && std::abs(*vm) < d_min) { d_min = std::abs(*vm); t_min = tm; }
      }
      if (d_min < 1e-8)
        if (auto c = make_cycle(t_min)) detail::add_cycle(rep.cycles, *c, cfg.sep_tol);
    }
  }

  std::sort(rep.cycles.begin(), rep.cycles.end(),
            [](const Cycle& a, const Cycle& b) { return a.x0 < b.x0; });
  return rep;
}

}  // namespace abelpw

#endif
