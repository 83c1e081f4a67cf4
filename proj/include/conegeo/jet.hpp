#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>

namespace conegeo {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec3 = Eigen::Vector3d;

/// Second-order forward-mode scalar in two chart variables: value, gradient
/// and symmetric Hessian with respect to the chart coordinates. Arithmetic
/// on Jet2 propagates derivatives exactly, so any composite expression
/// evaluated on seeded coordinates carries machine-precision jets.
struct Jet2 {
  double v = 0.0;
  Vec2 g = Vec2::Zero();
  Mat2 h = Mat2::Zero();

  Jet2() = default;
  Jet2(double value) : v(value) {}
  Jet2(double value, const Vec2& grad, const Mat2& hess) : v(value), g(grad), h(hess) {}

  /// A coordinate seeded for differentiation: d/dx_index = 1.
  static Jet2 variable(double value, int index) {
    Jet2 j(value);
    j.g(index) = 1.0;
    return j;
  }

  bool finite() const {
    return std::isfinite(v) && g.allFinite() && h.allFinite();
  }

  Jet2 operator-() const { return {-v, -g, -h}; }

  Jet2& operator+=(const Jet2& o) { v += o.v; g += o.g; h += o.h; return *this; }
  Jet2& operator-=(const Jet2& o) { v -= o.v; g -= o.g; h -= o.h; return *this; }
  Jet2& operator*=(const Jet2& o);
  Jet2& operator+=(double c) { v += c; return *this; }
  Jet2& operator-=(double c) { v -= c; return *this; }
  Jet2& operator*=(double c) { v *= c; g *= c; h *= c; return *this; }
  Jet2& operator/=(double c) { v /= c; g /= c; h /= c; return *this; }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.v + b.v, a.g + b.g, a.h + b.h}; }
inline Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.v - b.v, a.g - b.g, a.h - b.h}; }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Mat2 cross = a.g * b.g.transpose();
  return {a.v * b.v, a.v * b.g + b.v * a.g, a.v * b.h + b.v * a.h + cross + cross.transpose()};
}

inline Jet2& Jet2::operator*=(const Jet2& o) { *this = *this * o; return *this; }

inline Jet2 operator+(const Jet2& a, double c) { return {a.v + c, a.g, a.h}; }
inline Jet2 operator+(double c, const Jet2& a) { return a + c; }
inline Jet2 operator-(const Jet2& a, double c) { return {a.v - c, a.g, a.h}; }
inline Jet2 operator-(double c, const Jet2& a) { return {c - a.v, -a.g, -a.h}; }
inline Jet2 operator*(const Jet2& a, double c) { return {a.v * c, a.g * c, a.h * c}; }
inline Jet2 operator*(double c, const Jet2& a) { return a * c; }

/// f(a) with f value/first/second derivative supplied at a.v.
inline Jet2 chain(double f, double df, double d2f, const Jet2& a) {
  return {f, df * a.g, df * a.h + d2f * (a.g * a.g.transpose())};
}

inline Jet2 inverse(const Jet2& a) {
  double iv = 1.0 / a.v;
  return chain(iv, -iv * iv, 2.0 * iv * iv * iv, a);
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * inverse(b); }
inline Jet2 operator/(const Jet2& a, double c) { return a * (1.0 / c); }
inline Jet2 operator/(double c, const Jet2& a) { return inverse(a) * c; }

inline Jet2 exp(const Jet2& a) { double e = std::exp(a.v); return chain(e, e, e, a); }
inline Jet2 log(const Jet2& a) { return chain(std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v), a); }
inline Jet2 sqrt(const Jet2& a) {
  double s = std::sqrt(a.v);
  return chain(s, 0.5 / s, -0.25 / (s * a.v), a);
}
inline Jet2 sin(const Jet2& a) { double s = std::sin(a.v), c = std::cos(a.v); return chain(s, c, -s, a); }
inline Jet2 cos(const Jet2& a) { double s = std::sin(a.v), c = std::cos(a.v); return chain(c, -s, -c, a); }
inline Jet2 tan(const Jet2& a) {
  double t = std::tan(a.v), s = 1.0 + t * t;
  return chain(t, s, 2.0 * t * s, a);
}
inline Jet2 atan(const Jet2& a) {
  double d = 1.0 + a.v * a.v;
  return chain(std::atan(a.v), 1.0 / d, -2.0 * a.v / (d * d), a);
}
inline Jet2 sinh(const Jet2& a) { double s = std::sinh(a.v), c = std::cosh(a.v); return chain(s, c, s, a); }
inline Jet2 cosh(const Jet2& a) { double s = std::sinh(a.v), c = std::cosh(a.v); return chain(c, s, c, a); }
inline Jet2 pow(const Jet2& a, double p) {
  double f = std::pow(a.v, p);
  return chain(f, p * std::pow(a.v, p - 1.0), p * (p - 1.0) * std::pow(a.v, p - 2.0), a);
}
inline Jet2 abs(const Jet2& a) { return a.v < 0.0 ? -a : a; }

inline bool operator<(const Jet2& a, const Jet2& b) { return a.v < b.v; }
inline bool operator>(const Jet2& a, const Jet2& b) { return a.v > b.v; }
inline bool operator<=(const Jet2& a, const Jet2& b) { return a.v <= b.v; }
inline bool operator>=(const Jet2& a, const Jet2& b) { return a.v >= b.v; }
inline bool operator==(const Jet2& a, const Jet2& b) { return a.v == b.v; }
inline bool operator!=(const Jet2& a, const Jet2& b) { return a.v != b.v; }

/// Exact second-order chain rule for c∘φ: c carries jets with respect to the
/// target coordinates, (w1,w2) the jets of the map components with respect to
/// the source coordinates.
inline Jet2 compose(const Jet2& c, const Jet2& w1, const Jet2& w2) {
  Mat2 J;
  J.row(0) = w1.g.transpose();
  J.row(1) = w2.g.transpose();
  Jet2 r;
  r.v = c.v;
  r.g = J.transpose() * c.g;
  r.h = J.transpose() * c.h * J + c.g(0) * w1.h + c.g(1) * w2.h;
  return r;
}

}  // namespace conegeo

namespace Eigen {

template <>
struct NumTraits<conegeo::Jet2> : NumTraits<double> {
  using Real = conegeo::Jet2;
  using NonInteger = conegeo::Jet2;
  using Nested = conegeo::Jet2;
  using Literal = double;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 9,
    MulCost = 18
  };
};

template <typename BinaryOp>
struct ScalarBinaryOpTraits<conegeo::Jet2, double, BinaryOp> {
  using ReturnType = conegeo::Jet2;
};
template <typename BinaryOp>
struct ScalarBinaryOpTraits<double, conegeo::Jet2, BinaryOp> {
  using ReturnType = conegeo::Jet2;
};

}  // namespace Eigen
