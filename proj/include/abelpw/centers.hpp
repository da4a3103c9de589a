#ifndef ABELPW_CENTERS_HPP
#define ABELPW_CENTERS_HPP

#include <algorithm>
#include <cmath>

#include "abelpw/common.hpp"
#include "abelpw/flow.hpp"
#include "abelpw/trigpoly.hpp"

namespace abelpw {

enum class CenterKind { none, linear_positive, linear_negative, global };

struct CenterClass {
  CenterKind kind = CenterKind::none;
  // Witness: which conditions held.
  bool a0_zero = false;
  bool proportional = false;
  double proportionality_residual = 0.0;
  bool A_one = false, B_zero = false;
  bool Abar_one = false, Bbar_zero = false;
  // Diagnostic only: max residual of the T(t) = 2*pi - t symmetry on a probe.
  double symmetry_residual = 0.0;
};

// Algebraic center detection per the characterization: global center iff
// a0 = 0 and a, b proportional (tested on raw coefficients); otherwise
// linear centers from A = 1, B = 0 (resp. barred) with the continuum's sign
// validated by integration.
inline CenterClass detect_center(const AbelEq& eq, const Tolerances& tol = {}) {
  CenterClass cc;
  const double a0 = eq.a0(), b0 = eq.b.c0;
  const double amag = std::abs(a0) + eq.a.amplitude();
  const double bmag = std::abs(b0) + eq.b.amplitude();
  const double scale = std::max(1.0, amag * bmag);

  cc.a0_zero = std::abs(a0) < 1e-12 * std::max(1.0, amag);

  if (eq.b.is_zero(1e-14 * std::max(1.0, bmag))) {
    cc.proportional = true;  // b == 0 counts as proportional
    cc.proportionality_residual = 0.0;
  } else if (eq.a.is_zero(1e-14 * std::max(1.0, amag))) {
    // a == 0: x' = b(t); every solution periodic iff the mean of b vanishes.
    cc.proportional = std::abs(b0) < 1e-12 * std::max(1.0, bmag);
    cc.proportionality_residual = std::abs(b0);
  } else {
    double cross = eq.a.c1 * eq.b.c2 - eq.a.c2 * eq.b.c1;
    // b0 consistency: b = lambda*a forces b0 = lambda*a0 = 0 when a0 = 0.
    double res = std::abs(cross) / std::max(1.0, amag * bmag);
    double b0res = cc.a0_zero ? std::abs(b0) / std::max(1.0, bmag) : 0.0;
    cc.proportionality_residual = std::max(res, b0res);
    cc.proportional = cc.proportionality_residual < 1e-12;
  }

  if (cc.a0_zero && cc.proportional) {
    cc.kind = CenterKind::global;
    cc.A_one = cc.B_zero = cc.Abar_one = cc.Bbar_zero = true;
    // Diagnostic: T(t) = 2*pi - t symmetry of the return time (normalized b).
    if (eq.b_normalized() && !eq.b.is_zero()) {
      double tb = eq.tbar();
      for (double f : {0.25, 0.5, 0.75}) {
        double t = f * tb;
        Trajectory tr = integrate_flow(eq, t, 0.0, two_pi, tol);
        for (const auto& cr : tr.crossings)
          if (cr.t > tb - 1e-9) {
            cc.symmetry_residual =
                std::max(cc.symmetry_residual, std::abs(cr.t - (two_pi - t)));
            break;
          }
      }
    }
    return cc;
  }

  // Linear centers: compute A, B (and barred) directly.
  double A = std::exp(two_pi * a0);
  double Abar = std::exp(-two_pi * a0);
  auto up = [&eq](double s) { return eq.b.eval(s) * std::exp(integrate(eq.a, s, two_pi)); };
  auto dn = [&eq](double s) { return eq.b.eval(s) * std::exp(-integrate(eq.a, s, two_pi)); };
  double B = eq.b.is_zero() ? 0.0 : adaptive_quadrature(up, 0.0, two_pi, 1e-13);
  double Bbar = eq.b.is_zero() ? 0.0 : adaptive_quadrature(dn, 0.0, two_pi, 1e-13);
  cc.A_one = std::abs(A - 1.0) < 1e-10;
  cc.B_zero = std::abs(B) < 1e-9 * scale;
  cc.Abar_one = std::abs(Abar - 1.0) < 1e-10;
  cc.Bbar_zero = std::abs(Bbar) < 1e-9 * scale;

  auto stays = [&eq, &tol](double x0, int sign) {
    Trajectory tr = integrate_flow(eq, 0.0, x0, two_pi, tol);
    double worst = sign * x0;
    for (auto& s : tr.samples) worst = std::min(worst, sign * s.second);
    return worst >= -1e-9;
  };
  const double W = eq.cycle_window();
  if (cc.A_one && cc.B_zero && stays(W, +1)) {
    cc.kind = CenterKind::linear_positive;
    return cc;
  }
  if (cc.Abar_one && cc.Bbar_zero && stays(-W, -1)) {
    cc.kind = CenterKind::linear_negative;
    return cc;
  }
  cc.kind = CenterKind::none;
  return cc;
}

// Max |d| over a sample grid spanning the a priori cycle window; cross-check
// for detect_center.
inline double verify_center_numeric(const AbelEq& eq, int n_samples = 32,
                                    const Tolerances& tol = {}) {
  const double W = eq.probe_window();
  double worst = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    double x = -W + 2.0 * W * (i + 0.5) / n_samples;
    double d = integrate_flow(eq, 0.0, x, two_pi, tol).u_end - x;
    worst = std::max(worst, std::abs(d));
  }
  return worst;
}

}  // namespace abelpw

#endif
