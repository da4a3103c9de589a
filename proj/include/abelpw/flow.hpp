#ifndef ABELPW_FLOW_HPP
#define ABELPW_FLOW_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "abelpw/common.hpp"
#include "abelpw/trigpoly.hpp"

namespace abelpw {

// x' = a(t)|x| + b(t) with linear trigonometric a, b.
struct AbelEq {
  TrigPoly a, b;

  double a0() const { return a.c0; }
  double c() const { return std::exp(pi * a.c0); }
  double r1() const {
    if (a.c0 == 0.0) throw DivisionNearZeroError("r1 undefined: a0 = 0");
    return a.c1 / a.c0;
  }
  double r2() const {
    if (a.c0 == 0.0) throw DivisionNearZeroError("r2 undefined: a0 = 0");
    return a.c2 / a.c0;
  }
  // b in canonical position sin(t) + b0 (1 - cos t)?
  bool b_normalized(double tol = 1e-9) const {
    return std::abs(b.c2 - 1.0) < tol && std::abs(b.c0 + b.c1) < tol;
  }
  double b0() const { return b.c0; }
  double tbar() const { return normalized_tbar(b.c0); }

  // A priori bound on any periodic solution (Gronwall).
  double cycle_window() const {
    double max_b = std::abs(b.c0) + b.amplitude();
    double max_a = std::abs(a.c0) + a.amplitude();
    return two_pi * max_b * std::exp(two_pi * max_a) + 1.0;
  }

  // Probe window for displacement sampling: large |x| trajectories amplify
  // integration error past the 1e-9 center threshold, so probes stay moderate.
  double probe_window() const {
    double max_b = std::abs(b.c0) + b.amplitude();
    return std::min(cycle_window(), 2.0 * (1.0 + max_b));
  }
};

inline AbelEq normalized_eq(const NormalizedForm& nf) {
  return {nf.a, normalized_b(nf.b0)};
}

struct Crossing {
  double t;
  int dir;  // sign of u just after the crossing; 0 for a tangential touch
};

struct Trajectory {
  double tau = 0.0, x0 = 0.0;
  std::vector<std::pair<double, double>> samples;  // (t, u) at step ends
  std::vector<Crossing> crossings;
  double t_end = 0.0, u_end = 0.0;
};

namespace detail {

// One Dormand-Prince 5(4) step for the scalar linear branch
// u' = sigma*a(t)*u + b(t). Returns (u_new, error_estimate).
template <class RHS>
inline std::pair<double, double> dp5_step(const RHS& f, double t, double u, double h) {
  const double k1 = f(t, u);
  const double k2 = f(t + h / 5.0, u + h * (k1 / 5.0));
  const double k3 = f(t + 3.0 * h / 10.0, u + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
  const double k4 = f(t + 4.0 * h / 5.0,
                      u + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
  const double k5 = f(t + 8.0 * h / 9.0,
                      u + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                               64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
  const double k6 = f(t + h, u + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                                      46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                                      5103.0 / 18656.0 * k5));
  const double u5 = u + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                             2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
  const double k7 = f(t + h, u5);
  const double u4 = u + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 +
                             393.0 / 640.0 * k4 - 92097.0 / 339200.0 * k5 +
                             187.0 / 2100.0 * k6 + 1.0 / 40.0 * k7);
  return {u5, std::abs(u5 - u4)};
}

// Integrate the linear branch from (t0, u0) to t1 (either direction) with
// adaptive steps; no event handling. Returns u(t1).
template <class RHS>
inline double advance_linear(const RHS& f, double t0, double u0, double t1,
                             const Tolerances& tol) {
  double t = t0, u = u0;
  double dir = (t1 >= t0) ? 1.0 : -1.0;
  double h = dir * std::min(0.1, std::abs(t1 - t0));
  int rejects = 0;
  while (dir * (t1 - t) > 0.0) {
    if (dir * (t + h - t1) > 0.0) h = t1 - t;
    auto [u_new, err] = dp5_step(f, t, u, h);
    double sc = tol.abs + tol.rel * std::max(std::abs(u), std::abs(u_new));
    if (err <= sc || std::abs(h) < 1e-14) {
      t += h;
      u = u_new;
      rejects = 0;
      double fac = (err > 0.0) ? 0.9 * std::pow(sc / err, 0.2) : 5.0;
      h *= std::min(5.0, std::max(0.2, fac));
      if (std::abs(h) > 0.2) h = dir * 0.2;
    } else {
      h *= std::max(0.1, 0.9 * std::pow(sc / err, 0.2));
      if (++rejects > 60) throw StepFailureError("advance_linear: step control failed");
    }
  }
  return u;
}

}  // namespace detail

// Integrate x' = a(t)|x| + b(t) from (tau, x0) to t_end (t_end may be on either
// side of tau). Sign changes are located to tol.event and integration restarts
// on the other branch with u = 0 exactly.
inline Trajectory integrate_flow(const AbelEq& eq, double tau, double x0, double t_end,
                                 const Tolerances& tol = {}) {
  Trajectory traj;
  traj.tau = tau;
  traj.x0 = x0;
  traj.t_end = t_end;
  const double dir = (t_end >= tau) ? 1.0 : -1.0;

  double t = tau, u = x0;
  int sigma = sgn(u);
  if (sigma == 0) {
    // Branch chosen by the direction of motion: u' = b at u = 0.
    double bt = eq.b.eval(t);
    sigma = sgn(dir * bt);
    if (sigma == 0) sigma = sgn(dir * eq.b.deriv(t));
    if (sigma == 0) sigma = 1;
  }
  traj.samples.push_back({t, u});

  auto branch = [&eq](int s) {
    return [&eq, s](double tt, double uu) { return s * eq.a.eval(tt) * uu + eq.b.eval(tt); };
  };

  const double step_cap = 0.05;  // events bracketed at this resolution
  while (dir * (t_end - t) > 1e-15) {
    double h = dir * std::min(step_cap, std::abs(t_end - t));
    auto f = branch(sigma);
    double u_next = detail::advance_linear(f, t, u, t + h, tol);
    if (sgn(u_next) * sigma >= 0 || std::abs(u_next) <= 0.0) {
      // No crossing inside this stretch (u may be exactly 0 when b ~ 0).
      t += h;
      u = u_next;
      traj.samples.push_back({t, u});
      continue;
    }
    // Crossing inside (t, t+h): bisect on the event time.
    double lo = t, hi = t + h;
    double u_lo = u;
    for (int i = 0; i < 80 && std::abs(hi - lo) > tol.event; ++i) {
      double mid = 0.5 * (lo + hi);
      double u_mid = detail::advance_linear(f, lo, u_lo, mid, tol);
      if (sgn(u_mid) == sigma || u_mid == 0.0) {
        lo = mid;
        u_lo = u_mid;
      } else {
        hi = mid;
      }
    }
    double s = 0.5 * (lo + hi);
    t = s;
    u = 0.0;
    // New branch from the sign of u' = b at the event; a tangential touch
    // (b ~ 0 with b pushing u back) keeps the old branch.
    double bs = eq.b.eval(s);
    int new_sigma = sgn(dir * bs);
    if (new_sigma == 0) new_sigma = sgn(dir * eq.b.deriv(s));
    if (new_sigma == 0) new_sigma = -sigma;
    traj.crossings.push_back({s, new_sigma});
    sigma = new_sigma != 0 ? new_sigma : -sigma;
    traj.samples.push_back({t, u});
  }
  traj.u_end = u;
  if (traj.samples.empty() || traj.samples.back().first != t)
    traj.samples.push_back({t, u});
  return traj;
}

// u_x over the trajectory's span: exp(integral of sign(u)*a), piecewise in
// closed form between crossings. For a one-period trajectory this is the
// cycle multiplier.
inline double multiplier(const AbelEq& eq, const Trajectory& traj) {
  double t0 = traj.tau, t1 = traj.t_end;
  double acc = 0.0;
  double t = t0;
  int sigma = sgn(traj.x0);
  if (sigma == 0) {
    double bt = eq.b.eval(t0);
    sigma = sgn(bt);
    if (sigma == 0) sigma = sgn(eq.b.deriv(t0));
  }
  for (const auto& cr : traj.crossings) {
    acc += sigma * integrate(eq.a, t, cr.t);
    t = cr.t;
    if (cr.dir != 0) sigma = cr.dir;
  }
  acc += sigma * integrate(eq.a, t, t1);
  return std::exp(acc);
}

}  // namespace abelpw

#endif
