#pragma once

#include <cmath>

namespace heisosc {

/// Hyper-dual number v + d1 e1 + d2 e2 + d12 e1e2 with e1^2 = e2^2 = 0.
///
/// Seeding two directions gives first derivatives in d1, d2 and the mixed
/// second derivative in d12. Position-dependent directions are handled by
/// the caller through the d12 seed (see fields.hpp).
struct Jet2 {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d12 = 0.0;

  constexpr Jet2() = default;
  constexpr Jet2(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  constexpr Jet2(double value, double e1, double e2, double e12) : v(value), d1(e1), d2(e2), d12(e12) {}

  Jet2& operator+=(const Jet2& o) { v += o.v; d1 += o.d1; d2 += o.d2; d12 += o.d12; return *this; }
  Jet2& operator-=(const Jet2& o) { v -= o.v; d1 -= o.d1; d2 -= o.d2; d12 -= o.d12; return *this; }
  Jet2& operator*=(const Jet2& o) { *this = *this * o; return *this; }

  friend Jet2 operator-(const Jet2& a) { return {-a.v, -a.d1, -a.d2, -a.d12}; }
  friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
  friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
  friend Jet2 operator*(const Jet2& a, const Jet2& b) {
    return {a.v * b.v, a.v * b.d1 + a.d1 * b.v, a.v * b.d2 + a.d2 * b.v,
            a.v * b.d12 + a.d1 * b.d2 + a.d2 * b.d1 + a.d12 * b.v};
  }
  friend Jet2 operator*(double s, const Jet2& a) { return {s * a.v, s * a.d1, s * a.d2, s * a.d12}; }
  friend Jet2 operator*(const Jet2& a, double s) { return s * a; }
  friend Jet2 operator/(const Jet2& a, double s) { return (1.0 / s) * a; }
  friend Jet2 operator/(const Jet2& a, const Jet2& b);
};

/// g(a) for a scalar function with value g0, first derivative g1, second g2 at a.v.
inline Jet2 chain(const Jet2& a, double g0, double g1, double g2) {
  return {g0, g1 * a.d1, g1 * a.d2, g1 * a.d12 + g2 * a.d1 * a.d2};
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) {
  const double inv = 1.0 / b.v;
  return a * chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet2 sqrt(const Jet2& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

inline Jet2 pow(const Jet2& a, double e) {
  const double p = std::pow(a.v, e);
  return chain(a, p, e * p / a.v, e * (e - 1.0) * p / (a.v * a.v));
}

inline Jet2 exp(const Jet2& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}

inline Jet2 log(const Jet2& a) { return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }

inline Jet2 sin(const Jet2& a) {
  const double s = std::sin(a.v);
  return chain(a, s, std::cos(a.v), -s);
}

inline Jet2 cos(const Jet2& a) {
  const double c = std::cos(a.v);
  return chain(a, c, -std::sin(a.v), -c);
}

inline double value_of(double x) { return x; }
inline double value_of(const Jet2& x) { return x.v; }

}  // namespace heisosc
