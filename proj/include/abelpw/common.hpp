#ifndef ABELPW_COMMON_HPP
#define ABELPW_COMMON_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace abelpw {

inline constexpr double pi     = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct Tolerances {
  double rel = 1e-10;
  double abs = 1e-12;
  double event = 1e-12;  // absolute tolerance on zero-crossing times
};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IdenticallyZeroError : Error { using Error::Error; };
struct NoSignChangeError    : Error { using Error::Error; };
struct StepFailureError     : Error { using Error::Error; };
struct DivisionNearZeroError: Error { using Error::Error; };
struct OutOfRangeError      : Error { using Error::Error; };
struct DegenerateCurveError : Error { using Error::Error; };
struct IllConditionedError  : Error { using Error::Error; };
struct AmbiguousSignError   : Error { using Error::Error; };
struct WindowTooSmallError  : Error { using Error::Error; };

// Adaptive Simpson quadrature for smooth scalar integrands.
namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left  = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  // Roundoff floor: once delta is at the rounding level of the local
  // integral magnitude, further refinement only burns time (and can recurse
  // to the depth limit when the requested tolerance is below attainable
  // precision, e.g. a huge integrand with near-zero initial samples).
  double floor_tol = 1e-16 * (std::abs(left) + std::abs(right));
  if (depth <= 0 || std::abs(delta) <= std::max(15.0 * tol, floor_tol))
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <class F>
double adaptive_quadrature(const F& f, double a, double b, double rel_tol = 1e-12) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  // Scale from a handful of interior samples as well: the three Simpson
  // nodes can all sit near zeros of f while the integrand is huge elsewhere,
  // and an absolute tolerance far below the attainable relative precision
  // forces runaway refinement.
  double fmax = std::max({std::abs(fa), std::abs(fm), std::abs(fb)});
  for (double u : {0.125, 0.31, 0.625, 0.875})
    fmax = std::max(fmax, std::abs(f(a + (b - a) * u)));
  double scale = std::max({1.0, std::abs(whole), std::abs(b - a) * fmax});
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, rel_tol * scale, 48);
}

inline int sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace abelpw

#endif
