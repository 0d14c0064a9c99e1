#pragma once

// Small arithmetic types used by the pointwise geometry code:
//  - Dual:  forward-mode derivative along one direction (exact linearization).
//  - Jet2:  value plus first and second (theta, phi) partial derivatives,
//           used to build 2-jets of products such as v^k dF_k + nu N.

#include <array>
#include <cmath>

namespace immreg {

struct Dual {
  double v = 0.0;
  double d = 0.0;
  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(double value, double deriv) : v(value), d(deriv) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) {
    d = (d * o.v - v * o.d) / (o.v * o.v);
    v /= o.v;
    return *this;
  }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
inline Dual operator+(double a, const Dual& b) { return Dual(a) + b; }
inline Dual operator-(double a, const Dual& b) { return Dual(a) - b; }
inline Dual operator*(double a, const Dual& b) { return {a * b.v, a * b.d}; }
inline Dual operator/(double a, const Dual& b) { return Dual(a) / b; }
inline Dual operator+(const Dual& a, double b) { return a + Dual(b); }
inline Dual operator-(const Dual& a, double b) { return a - Dual(b); }
inline Dual operator*(const Dual& a, double b) { return {a.v * b, a.d * b}; }
inline Dual operator/(const Dual& a, double b) { return {a.v / b, a.d / b}; }

inline Dual sqrt(const Dual& a) {
  const double s = std::sqrt(a.v);
  return {s, a.d / (2 * s)};
}
inline Dual exp(const Dual& a) {
  const double e = std::exp(a.v);
  return {e, e * a.d};
}
inline Dual log(const Dual& a) { return {std::log(a.v), a.d / a.v}; }
inline Dual pow(const Dual& a, double p) {
  const double q = std::pow(a.v, p);
  return {q, p * std::pow(a.v, p - 1) * a.d};
}

inline double value(double x) { return x; }
inline double value(const Dual& x) { return x.v; }
inline double tangent(double) { return 0.0; }
inline double tangent(const Dual& x) { return x.d; }

// Second-order jet in (theta, phi). dd = (tt, tp, pp).
struct Jet2 {
  double v = 0.0;
  std::array<double, 2> d{};
  std::array<double, 3> dd{};

  static Jet2 constant(double c) { return Jet2{c, {}, {}}; }

  Jet2& operator+=(const Jet2& o) {
    v += o.v;
    for (int i = 0; i < 2; ++i) d[i] += o.d[i];
    for (int i = 0; i < 3; ++i) dd[i] += o.dd[i];
    return *this;
  }
  Jet2& operator-=(const Jet2& o) {
    v -= o.v;
    for (int i = 0; i < 2; ++i) d[i] -= o.d[i];
    for (int i = 0; i < 3; ++i) dd[i] -= o.dd[i];
    return *this;
  }
  Jet2& operator*=(double s) {
    v *= s;
    for (auto& x : d) x *= s;
    for (auto& x : dd) x *= s;
    return *this;
  }
};

inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
inline Jet2 operator*(double s, Jet2 a) { return a *= s; }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.v = a.v * b.v;
  r.d[0] = a.d[0] * b.v + a.v * b.d[0];
  r.d[1] = a.d[1] * b.v + a.v * b.d[1];
  r.dd[0] = a.dd[0] * b.v + 2 * a.d[0] * b.d[0] + a.v * b.dd[0];
  r.dd[1] = a.dd[1] * b.v + a.d[0] * b.d[1] + a.d[1] * b.d[0] + a.v * b.dd[1];
  r.dd[2] = a.dd[2] * b.v + 2 * a.d[1] * b.d[1] + a.v * b.dd[2];
  return r;
}

/// f(u) for a scalar function with derivatives f0, f1, f2 at u.v.
inline Jet2 compose(const Jet2& u, double f0, double f1, double f2) {
  Jet2 r;
  r.v = f0;
  r.d[0] = f1 * u.d[0];
  r.d[1] = f1 * u.d[1];
  r.dd[0] = f2 * u.d[0] * u.d[0] + f1 * u.dd[0];
  r.dd[1] = f2 * u.d[0] * u.d[1] + f1 * u.dd[1];
  r.dd[2] = f2 * u.d[1] * u.d[1] + f1 * u.dd[2];
  return r;
}

inline Jet2 reciprocal(const Jet2& u) {
  const double x = u.v;
  return compose(u, 1 / x, -1 / (x * x), 2 / (x * x * x));
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }
inline Jet2 sqrt(const Jet2& u) {
  const double s = std::sqrt(u.v);
  return compose(u, s, 0.5 / s, -0.25 / (s * u.v));
}

template <class T>
using Vec3 = std::array<T, 3>;

template <class T>
Vec3<T> operator+(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
template <class T>
Vec3<T> operator-(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
template <class S, class T>
Vec3<T> scale(const S& s, const Vec3<T>& a) {
  return {s * a[0], s * a[1], s * a[2]};
}
template <class T>
T dot(const Vec3<T>& a, const Vec3<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
template <class T>
Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace immreg
