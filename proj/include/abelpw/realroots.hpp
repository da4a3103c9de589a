#ifndef ABELPW_REALROOTS_HPP
#define ABELPW_REALROOTS_HPP

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "abelpw/common.hpp"

namespace abelpw {

// 128-bit significand by default; escalate to 256 when a Sturm evaluation
// cannot be signed against its running rounding-error bound.
using Real128 = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<128, boost::multiprecision::digit_base_2>>;
using Real256 = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<256, boost::multiprecision::digit_base_2>>;

// Dense univariate polynomial, coefficients ascending by degree.
template <class R>
struct UniPoly {
  std::vector<R> c;

  UniPoly() = default;
  explicit UniPoly(std::vector<R> coeffs) : c(std::move(coeffs)) { trim(); }

  int degree() const { return (int)c.size() - 1; }
  bool is_zero() const { return c.empty(); }

  void trim() {
    R scale{0};
    for (auto& ci : c) scale = std::max(scale, R(abs(ci)));
    if (scale == 0) { c.clear(); return; }
    R cut = scale * R("1e-30");
    while (!c.empty() && abs(c.back()) <= cut) c.pop_back();
  }

  R eval(const R& x) const {
    R v{0};
    for (int i = (int)c.size() - 1; i >= 0; --i) v = v * x + c[i];
    return v;
  }

  // Horner with a running rounding-error bound (unit roundoff of R).
  // Returns (value, certified absolute error bound).
  std::pair<R, R> eval_certified(const R& x) const {
    const R u = std::numeric_limits<R>::epsilon();
    R v{0}, e{0}, ax = abs(x);
    for (int i = (int)c.size() - 1; i >= 0; --i) {
      v = v * x + c[i];
      e = e * ax + abs(v) * u * 4;
    }
    return {v, e};
  }

  UniPoly deriv() const {
    if (c.size() <= 1) return UniPoly{};
    std::vector<R> d(c.size() - 1);
    for (size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * R((unsigned)i);
    return UniPoly(std::move(d));
  }
};

// Dense bivariate polynomial: coeff[i][j] multiplies z1^i z2^j.
template <class R>
struct BiPoly {
  std::vector<std::vector<R>> coeff;

  int deg1() const { return (int)coeff.size() - 1; }
  int deg2() const {
    int d = -1;
    for (auto& row : coeff) d = std::max(d, (int)row.size() - 1);
    return d;
  }

  R eval(const R& z1, const R& z2) const {
    R v{0};
    for (int i = (int)coeff.size() - 1; i >= 0; --i) {
      R row{0};
      for (int j = (int)coeff[i].size() - 1; j >= 0; --j) row = row * z2 + coeff[i][j];
      v = v * z1 + row;
    }
    return v;
  }

  // Collapse to a univariate polynomial in z2 at fixed z1 (or vice versa).
  UniPoly<R> at_z1(const R& z1) const {
    int d2 = deg2();
    std::vector<R> out(d2 + 1, R{0});
    for (int i = 0; i < (int)coeff.size(); ++i) {
      R p = pow(z1, i);
      for (int j = 0; j < (int)coeff[i].size(); ++j) out[j] += coeff[i][j] * p;
    }
    return UniPoly<R>(std::move(out));
  }
  UniPoly<R> at_z2(const R& z2) const {
    std::vector<R> out(coeff.size(), R{0});
    for (int i = 0; i < (int)coeff.size(); ++i) {
      R row{0};
      for (int j = (int)coeff[i].size() - 1; j >= 0; --j) row = row * z2 + coeff[i][j];
      out[i] = row;
    }
    return UniPoly<R>(std::move(out));
  }
};

namespace detail {

template <class R>
int certified_sign(const std::pair<R, R>& ve) {
  if (abs(ve.first) <= ve.second) {
    if (ve.second == 0) return 0;
    throw AmbiguousSignError("polynomial evaluation below certified error bound");
  }
  return ve.first > 0 ? 1 : -1;
}

// Euclidean remainder p mod q (both nonzero), scaled to curb growth.
template <class R>
UniPoly<R> poly_rem(const UniPoly<R>& p, const UniPoly<R>& q) {
  std::vector<R> r = p.c;
  int dq = q.degree();
  const R lead = q.c.back();
  while ((int)r.size() - 1 >= dq) {
    R f = r.back() / lead;
    int shift = (int)r.size() - 1 - dq;
    for (int i = 0; i <= dq; ++i) r[i + shift] -= f * q.c[i];
    r.pop_back();
  }
  UniPoly<R> out(std::move(r));
  if (!out.is_zero()) {
    R scale{0};
    for (auto& ci : out.c) scale = std::max(scale, R(abs(ci)));
    for (auto& ci : out.c) ci /= scale;
  }
  return out;
}

}  // namespace detail

template <class R>
UniPoly<R> poly_gcd(UniPoly<R> a, UniPoly<R> b) {
  a.trim();
  b.trim();
  while (!b.is_zero()) {
    UniPoly<R> r = detail::poly_rem(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.is_zero())
    for (auto& ci : a.c) ci /= a.c.back();
  return a;
}

// Squarefree part p / gcd(p, p').
template <class R>
UniPoly<R> squarefree(const UniPoly<R>& p) {
  UniPoly<R> g = poly_gcd(p, p.deriv());
  if (g.degree() <= 0) return p;
  // exact-degree division p / g
  std::vector<R> r = p.c, q(p.degree() - g.degree() + 1, R{0});
  const R lead = g.c.back();
  for (int k = (int)q.size() - 1; k >= 0; --k) {
    R f = r[k + g.degree()] / lead;
    q[k] = f;
    for (int i = 0; i <= g.degree(); ++i) r[i + k] -= f * g.c[i];
  }
  return UniPoly<R>(std::move(q));
}

template <class R>
std::vector<UniPoly<R>> sturm_sequence(const UniPoly<R>& p) {
  std::vector<UniPoly<R>> seq;
  seq.push_back(p);
  UniPoly<R> d = p.deriv();
  if (d.is_zero()) return seq;
  seq.push_back(d);
  while (seq.back().degree() > 0) {
    UniPoly<R> r = detail::poly_rem(seq[seq.size() - 2], seq.back());
    if (r.is_zero()) break;
    for (auto& ci : r.c) ci = -ci;
    seq.push_back(std::move(r));
  }
  return seq;
}

namespace detail {

template <class R>
int sign_variations(const std::vector<UniPoly<R>>& seq, const R& x) {
  int var = 0, prev = 0;
  for (auto& p : seq) {
    int s;
    try {
      s = certified_sign(p.eval_certified(x));
    } catch (const AmbiguousSignError&) {
      throw;
    }
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++var;
    prev = s;
  }
  return var;
}

}  // namespace detail

// Exact number of real roots of squarefree p in (lo, hi].
template <class R>
int sturm_count(const UniPoly<R>& p, const R& lo, const R& hi,
                const std::vector<UniPoly<R>>* precomputed = nullptr) {
  if (p.is_zero()) throw IdenticallyZeroError("sturm_count on the zero polynomial");
  if (p.degree() == 0) return 0;
  std::vector<UniPoly<R>> local;
  const std::vector<UniPoly<R>>* seq = precomputed;
  if (!seq) {
    local = sturm_sequence(p);
    seq = &local;
  }
  return detail::sign_variations(*seq, lo) - detail::sign_variations(*seq, hi);
}

template <class R>
struct RootWithMult {
  R x;
  int mult;
};

// Isolate all real roots of p in (lo, hi) by Sturm bisection and refine each
// to tol. Multiple roots are handled by deflating to the squarefree part; the
// multiplicity is recovered by successive derivatives at the refined root.
template <class R>
std::vector<RootWithMult<R>> isolate_and_refine(const UniPoly<R>& p, R lo, R hi, const R& tol) {
  std::vector<RootWithMult<R>> out;
  if (p.is_zero()) throw IdenticallyZeroError("isolate_and_refine on the zero polynomial");
  if (p.degree() == 0) return out;
  UniPoly<R> sf = squarefree(p);
  auto seq = sturm_sequence(sf);
  // Nudge endpoints off roots of sf.
  R span = hi - lo;
  while (sf.eval(lo) == 0) lo -= tol * span;
  while (sf.eval(hi) == 0) hi += tol * span;

  struct Box {
    R lo, hi;
    int n;
  };
  std::vector<Box> work{{lo, hi, sturm_count(sf, lo, hi, &seq)}};
  std::vector<std::pair<R, R>> isolated;
  while (!work.empty()) {
    Box b = work.back();
    work.pop_back();
    if (b.n == 0) continue;
    if (b.n == 1) {
      isolated.emplace_back(b.lo, b.hi);
      continue;
    }
    R mid = (b.lo + b.hi) / 2;
    while (sf.eval(mid) == 0) mid += (b.hi - b.lo) / 64;
    int nl = sturm_count(sf, b.lo, mid, &seq);
    work.push_back({b.lo, mid, nl});
    work.push_back({mid, b.hi, b.n - nl});
  }

  UniPoly<R> dsf = sf.deriv();
  for (auto& [a, b] : isolated) {
    // Bisection to a reliable bracket, then Newton polish.
    R x1 = a, x2 = b;
    R f1 = sf.eval(x1);
    for (int it = 0; it < 300 && x2 - x1 > tol; ++it) {
      R m = (x1 + x2) / 2;
      R fm = sf.eval(m);
      if (fm == 0) { x1 = x2 = m; break; }
      if ((fm > 0) == (f1 > 0)) { x1 = m; f1 = fm; }
      else x2 = m;
    }
    R x = (x1 + x2) / 2;
    for (int it = 0; it < 4; ++it) {
      R d = dsf.eval(x);
      if (d == 0) break;
      R step = sf.eval(x) / d;
      if (abs(step) > (b - a)) break;
      x -= step;
    }
    // Multiplicity in the original p: first non-vanishing derivative.
    int mult = 1;
    if (sf.degree() != p.degree()) {
      UniPoly<R> d = p;
      R scale{0};
      for (auto& ci : p.c) scale = std::max(scale, R(abs(ci)));
      for (mult = 0; mult < p.degree() + 1; ++mult) {
        R v = d.eval(x);
        if (abs(v) > scale * R("1e-20")) break;
        d = d.deriv();
      }
      if (mult == 0) mult = 1;
    }
    out.push_back({x, mult});
  }
  std::sort(out.begin(), out.end(),
            [](const RootWithMult<R>& u, const RootWithMult<R>& v) { return u.x < v.x; });
  return out;
}

namespace detail {

// Bareiss fraction-free determinant; n is small (<= 12 here).
template <class R>
R bareiss_det(std::vector<std::vector<R>> m) {
  int n = (int)m.size();
  if (n == 0) return R{1};
  R prev{1};
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (m[k][k] == 0) {
      int piv = -1;
      for (int i = k + 1; i < n; ++i)
        if (m[i][k] != 0) { piv = i; break; }
      if (piv < 0) return R{0};
      std::swap(m[k], m[piv]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
    prev = m[k][k];
  }
  return sign > 0 ? m[n - 1][n - 1] : -m[n - 1][n - 1];
}

// Sylvester resultant of two univariate polynomials.
template <class R>
R sylvester_resultant(const UniPoly<R>& f, const UniPoly<R>& g) {
  int df = f.degree(), dg = g.degree();
  if (df < 0 || dg < 0) return R{0};
  if (df == 0) return pow(f.c[0], dg);
  if (dg == 0) return pow(g.c[0], df);
  int n = df + dg;
  std::vector<std::vector<R>> m(n, std::vector<R>(n, R{0}));
  for (int i = 0; i < dg; ++i)
    for (int j = 0; j <= df; ++j) m[i][i + j] = f.c[df - j];
  for (int i = 0; i < df; ++i)
    for (int j = 0; j <= dg; ++j) m[dg + i][i + j] = g.c[dg - j];
  return bareiss_det(std::move(m));
}

}  // namespace detail

enum class Eliminate { z1, z2 };

// Resultant of f and g eliminating one variable. The degrees are small and
// fixed, so evaluation-interpolation is used: the resultant (a univariate
// polynomial of degree <= d in the surviving variable) is recovered from
// Sylvester determinants at d+1 Chebyshev nodes via Newton's divided
// differences.
template <class R>
UniPoly<R> resultant(const BiPoly<R>& f, const BiPoly<R>& g, Eliminate elim,
                     double node_radius = 1.0) {
  int df1 = f.deg1(), df2 = f.deg2(), dg1 = g.deg1(), dg2 = g.deg2();
  int dmax;  // degree bound of the resultant in the surviving variable
  if (elim == Eliminate::z2)
    dmax = df1 * dg2 + dg1 * df2;
  else
    dmax = df2 * dg1 + dg2 * df1;
  if (dmax < 0) throw IdenticallyZeroError("resultant of a zero polynomial");
  int npts = dmax + 1;

  // Chebyshev nodes scaled to node_radius avoid Runge-type ill-conditioning.
  std::vector<R> xs(npts), ys(npts);
  for (int k = 0; k < npts; ++k) {
    R theta = R(2 * k + 1) / R(2 * npts) * 4 * atan(R(1));
    xs[k] = R(node_radius) * cos(theta);
    UniPoly<R> fu = (elim == Eliminate::z2) ? f.at_z1(xs[k]) : f.at_z2(xs[k]);
    UniPoly<R> gu = (elim == Eliminate::z2) ? g.at_z1(xs[k]) : g.at_z2(xs[k]);
    ys[k] = detail::sylvester_resultant(fu, gu);
  }

  // Newton divided differences -> monomial coefficients.
  std::vector<R> dd = ys;
  for (int j = 1; j < npts; ++j)
    for (int i = npts - 1; i >= j; --i) dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - j]);
  std::vector<R> poly{dd[npts - 1]};
  for (int i = npts - 2; i >= 0; --i) {
    // poly = poly * (x - xs[i]) + dd[i]
    poly.insert(poly.begin(), R{0});
    for (size_t j = 0; j + 1 < poly.size(); ++j) poly[j] -= xs[i] * poly[j + 1];
    poly[0] += dd[i];
  }
  return UniPoly<R>(std::move(poly));
}

}  // namespace abelpw

#endif
