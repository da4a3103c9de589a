#ifndef ABELPW_TRIGPOLY_HPP
#define ABELPW_TRIGPOLY_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "abelpw/common.hpp"

namespace abelpw {

// Linear trigonometric polynomial c0 + c1*cos(t) + c2*sin(t).
struct TrigPoly {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;

  double eval(double t) const { return c0 + c1 * std::cos(t) + c2 * std::sin(t); }
  double deriv(double t) const { return -c1 * std::sin(t) + c2 * std::cos(t); }
  double amplitude() const { return std::hypot(c1, c2); }
  bool is_zero(double tol = 0.0) const {
    return std::abs(c0) <= tol && std::abs(c1) <= tol && std::abs(c2) <= tol;
  }
  TrigPoly scaled(double s) const { return {c0 * s, c1 * s, c2 * s}; }
  // p(t + dt) as a TrigPoly (rotation of the (c1,c2) pair).
  TrigPoly shifted(double dt) const {
    double cd = std::cos(dt), sd = std::sin(dt);
    return {c0, c1 * cd + c2 * sd, -c1 * sd + c2 * cd};
  }
};

// Exact antiderivative difference: \int_{t0}^{t1} p.
inline double integrate(const TrigPoly& p, double t0, double t1) {
  return p.c0 * (t1 - t0) + p.c1 * (std::sin(t1) - std::sin(t0)) -
         p.c2 * (std::cos(t1) - std::cos(t0));
}

struct TrigZero {
  double t;            // in [0, 2*pi)
  bool double_root;    // touches zero without sign change
};

// All zeros of p in [0, 2*pi), sorted, with multiplicity flag. A non-constant
// linear trig polynomial has at most two.
inline std::vector<TrigZero> zeros_in_period(const TrigPoly& p) {
  if (p.is_zero())
    throw IdenticallyZeroError("zeros_in_period: polynomial is identically zero");
  std::vector<double> roots;
  if (p.amplitude() == 0.0) return {};  // nonzero constant
  // tan half-angle: with u = tan(t/2),
  //   (c0 - c1) u^2 + 2 c2 u + (c0 + c1) = 0,  plus t = pi iff c0 - c1 = 0.
  double A = p.c0 - p.c1, Bq = 2.0 * p.c2, C = p.c0 + p.c1;
  double scale = std::max({std::abs(A), std::abs(Bq), std::abs(C)});
  auto push = [&roots](double t) {
    t = std::fmod(t, two_pi);
    if (t < 0) t += two_pi;
    roots.push_back(t);
  };
  if (std::abs(A) <= 1e-14 * scale) {
    // t = pi is a root; remaining linear equation 2 c2 u + (c0 + c1) = 0.
    push(pi);
    if (std::abs(Bq) > 1e-14 * scale) push(2.0 * std::atan(-C / Bq));
  } else {
    double disc = Bq * Bq - 4.0 * A * C;
    if (disc > 0.0) {
      double sq = std::sqrt(disc);
      double q = -0.5 * (Bq + std::copysign(sq, Bq));
      push(2.0 * std::atan(q / A));
      push(2.0 * std::atan(C / q));  // q != 0 when disc > 0
    } else if (disc == 0.0) {
      push(2.0 * std::atan(-Bq / (2.0 * A)));
    } else {
      return {};
    }
  }
  // Bisection polish near t = pi where the substitution loses accuracy.
  for (double& t : roots) {
    double lo = t - 1e-3, hi = t + 1e-3;
    if (sgn(p.eval(lo)) * sgn(p.eval(hi)) < 0) {
      for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        if (sgn(p.eval(lo)) * sgn(p.eval(mid)) <= 0) hi = mid; else lo = mid;
      }
      t = 0.5 * (lo + hi);
      if (t < 0) t += two_pi;
      if (t >= two_pi) t -= two_pi;
    }
  }
  std::sort(roots.begin(), roots.end());
  // Merge duplicates (a double root can be found twice, and 0/2*pi alias).
  std::vector<double> uniq;
  for (double t : roots)
    if (uniq.empty() || std::abs(t - uniq.back()) > 1e-9) uniq.push_back(t);
  if (uniq.size() >= 2 && uniq.back() > two_pi - 1e-9 && uniq.front() < 1e-9)
    uniq.pop_back();
  std::vector<TrigZero> out;
  double dtol = 1e-9 * (1.0 + p.amplitude());
  for (double t : uniq) out.push_back({t, std::abs(p.deriv(t)) < dtol});
  return out;
}

// b(t) in canonical position: b(0) = 0, b'(0) = 1, i.e. sin(t) + b0 (1 - cos t).
struct NormalizedForm {
  TrigPoly a;          // time-shifted a
  double b0;
  double time_shift;   // normalized time s relates to original t by t = s + time_shift
  double x_scale;      // positive; u_orig = x_scale * u_norm
  double tbar;         // second zero of normalized b, in (0, 2*pi)
};

inline double normalized_tbar(double b0) { return pi + 2.0 * std::atan(b0); }

// Shift/rescale (a, b) so that b(0) = 0, b'(0) = 1. Throws NoSignChangeError
// when b has no simple zero with positive slope.
inline NormalizedForm normalize(const TrigPoly& a, const TrigPoly& b) {
  auto zs = b.is_zero() ? std::vector<TrigZero>{} : zeros_in_period(b);
  std::optional<double> t0;
  for (const auto& z : zs)
    if (!z.double_root && b.deriv(z.t) > 0.0) t0 = z.t;
  if (!t0)
    throw NoSignChangeError("normalize: b has no simple zero with positive slope");
  TrigPoly bs = b.shifted(*t0);
  double s = bs.c2;  // b'(0) after shift
  NormalizedForm nf;
  nf.a = a.shifted(*t0);
  nf.time_shift = *t0;
  nf.x_scale = s;
  nf.b0 = bs.c0 / s;
  nf.tbar = normalized_tbar(nf.b0);
  return nf;
}

inline TrigPoly normalized_b(double b0) { return {b0, -b0, 1.0}; }

}  // namespace abelpw

#endif
