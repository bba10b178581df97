#pragma once
// Internal to the library: templated kernels shared by flatkernel.cpp and extension.cpp.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/constants/constants.hpp>

#include <boost/multiprecision/float128.hpp>

#include "ultraholo/numeric.hpp"

namespace uh {

using quad = boost::multiprecision::float128;

template <class R>
struct Cx {
  R re{0}, im{0};
  Cx() = default;
  Cx(R r) : re(r) {}
  Cx(R r, R i) : re(r), im(i) {}
  Cx& operator+=(const Cx& o) { re += o.re; im += o.im; return *this; }
  Cx& operator-=(const Cx& o) { re -= o.re; im -= o.im; return *this; }
};

template <class R> Cx<R> operator+(Cx<R> a, const Cx<R>& b) { return a += b; }
template <class R> Cx<R> operator-(Cx<R> a, const Cx<R>& b) { return a -= b; }
template <class R> Cx<R> operator*(const Cx<R>& a, const Cx<R>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class R> Cx<R> operator*(const Cx<R>& a, const R& b) { return {a.re * b, a.im * b}; }
template <class R> Cx<R> operator/(const Cx<R>& a, const Cx<R>& b) {
  R d = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}

template <class R> Cx<R> cx_polar(const R& mod, const R& arg) {
  using std::cos;
  using std::sin;
  return {mod * cos(arg), mod * sin(arg)};
}
template <class R> Cx<R> cx_exp(const Cx<R>& z) {
  using std::exp;
  return cx_polar<R>(exp(z.re), z.im);
}
template <class R> R cx_abs(const Cx<R>& z) {
  using std::sqrt;
  return sqrt(z.re * z.re + z.im * z.im);
}

// J(w) = int_0^inf sigma(t) / (t^2 + w^2) dt by a fixed rule
//   J~(w) = sum_i c_i / (t_i^2 + w^2) + A0 / w^2,
// a rational function of w, so exp(-(2 a w / pi) J~(w)) is holomorphic on Re w > 0.
struct FlatRule {
  std::vector<double> t2, c;
  double A0 = 0;
  std::vector<quad> t2q, cq;
  quad A0q = 0;
  // provenance
  double x_lo = 0, x_hi = 0, width = 0, tail_exponent = 0;
  std::size_t kinks = 0;

  template <class R> const std::vector<R>& nodes() const;
  template <class R> const std::vector<R>& coeffs() const;
  template <class R> R tail() const;
};

template <> inline const std::vector<double>& FlatRule::nodes<double>() const { return t2; }
template <> inline const std::vector<double>& FlatRule::coeffs<double>() const { return c; }
template <> inline double FlatRule::tail<double>() const { return A0; }
template <> inline const std::vector<quad>& FlatRule::nodes<quad>() const { return t2q; }
template <> inline const std::vector<quad>& FlatRule::coeffs<quad>() const { return cq; }
template <> inline quad FlatRule::tail<quad>() const { return A0q; }

// Exponent E(w) = -(2 w / pi) J~(w), so that F_a = exp(a E).
template <class R>
Cx<R> flat_exponent_w(const FlatRule& rule, const Cx<R>& w) {
  const auto& t2 = rule.nodes<R>();
  const auto& c = rule.coeffs<R>();
  Cx<R> w2 = w * w;
  R sr = 0, si = 0;
  if (w2.im == 0) {
    for (std::size_t i = 0; i < t2.size(); ++i) sr += c[i] / (t2[i] + w2.re);
  } else {
    const R v = w2.im, v2 = v * v;
    for (std::size_t i = 0; i < t2.size(); ++i) {
      R A = t2[i] + w2.re;
      R q = c[i] / (A * A + v2);
      sr += q * A;
      si -= q * v;
    }
  }
  Cx<R> J(sr, si);
  J += Cx<R>(rule.tail<R>()) / w2;
  static const R two_over_pi = R(2) / boost::math::constants::pi<R>();
  return w * J * R(-two_over_pi);
}

// E at xi = (r, theta) on the sector, through w = xi^s.
template <class R>
Cx<R> flat_exponent(const FlatRule& rule, double s, const R& r, const R& theta) {
  using std::pow;
  return flat_exponent_w<R>(rule, cx_polar<R>(pow(r, R(s)), R(s) * theta));
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
template <class R>
struct GaussRule {
  std::vector<R> x, w;
  explicit GaussRule(unsigned n) : x(n), w(n) {
    using std::cos;
    using std::fabs;
    const R pi = boost::math::constants::pi<R>();
    for (unsigned i = 0; i < n; ++i) {
      R z = cos(pi * (R(i) + R(0.75)) / (R(n) + R(0.5))), dp = 1;
      for (int it = 0; it < 100; ++it) {
        R p0 = 1, p1 = z;
        for (unsigned k = 2; k <= n; ++k) {
          R p2 = ((R(2 * k - 1)) * z * p1 - R(k - 1) * p0) / R(k);
          p0 = p1;
          p1 = p2;
        }
        if (n == 1) { p1 = z; p0 = 1; }
        dp = R(n) * (z * p1 - p0) / (z * z - 1);
        R dz = p1 / dp;
        z -= dz;
        if (fabs(dz) < std::numeric_limits<R>::epsilon() * 4) break;
      }
      // one more derivative evaluation at the converged node
      R p0 = 1, p1 = z;
      for (unsigned k = 2; k <= n; ++k) {
        R p2 = ((R(2 * k - 1)) * z * p1 - R(k - 1) * p0) / R(k);
        p0 = p1;
        p1 = p2;
      }
      dp = R(n) * (z * p1 - p0) / (z * z - 1);
      x[i] = z;
      w[i] = R(2) / ((1 - z * z) * dp * dp);
    }
  }
};

template <class R>
const GaussRule<R>& gauss_rule(unsigned n) {
  static const std::vector<GaussRule<R>> rules = [] {
    std::vector<GaussRule<R>> v;
    for (unsigned k = 0; k <= 32; ++k) v.emplace_back(k < 2 ? 2 : k);
    return v;
  }();
  return rules.at(n);
}

// Exponent E(e^{-x}) on the real axis for x = x_lo + k h, k = 0..n-1.
template <class R>
std::vector<R> axis_exponents(const FlatRule& rule, double s, double x_lo, double h, std::size_t n,
                              void (*par)(std::size_t, const std::function<void(std::size_t)>&)) {
  std::vector<R> e(n);
  par(n, [&](std::size_t k) {
    using std::exp;
    R x = R(x_lo) + R(h) * R(double(k));
    e[k] = flat_exponent<R>(rule, s, R(exp(-x)), R(0)).re;
  });
  return e;
}

// m_a(p) = int exp((p+1) x + a E(e^{-x})) dx by the trapezoid rule on the grid above.
// Throws truncation-failure when an end term is not negligible.
template <class R>
R trapezoid_moment(const std::vector<R>& e, double a, std::size_t p, double x_lo, double h, double rel_tol) {
  using std::exp;
  using std::log;
  const std::size_t n = e.size();
  std::vector<R> lt(n);
  R mx = -std::numeric_limits<R>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    lt[k] = R(double(p + 1)) * (R(x_lo) + R(h) * R(double(k))) + R(a) * e[k];
    if (lt[k] > mx) mx = lt[k];
  }
  R sum = 0;
  for (std::size_t k = 0; k < n; ++k) sum += exp(lt[k] - mx);
  if (exp(lt.front() - mx) > R(rel_tol) * sum || exp(lt.back() - mx) > R(rel_tol) * sum)
    throw Error("truncation-failure", "moment integrand not negligible at the ends of the grid");
  return R(h) * sum * exp(mx);
}

}  // namespace uh
