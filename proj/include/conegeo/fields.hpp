#pragma once

#include <array>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "conegeo/algebra2.hpp"
#include "conegeo/jet.hpp"

namespace conegeo {

enum class Backend { Analytic, FiniteDifference };

inline const char* backend_name(Backend b) {
  return b == Backend::Analytic ? "analytic" : "fd";
}

inline std::string point_str(const Vec2& p) {
  std::ostringstream os;
  os << "(" << p(0) << ", " << p(1) << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// Finite-difference jets of pointwise evaluators (the independent oracle
// backend; centered stencils, second order in the step).
// ---------------------------------------------------------------------------

template <typename F>
Jet2 fd_jet(const F& f, const Vec2& p, double h) {
  auto e = [&](double dx, double dy) { return f(Vec2(p(0) + dx, p(1) + dy)); };
  double c = e(0, 0);
  double xp = e(h, 0), xm = e(-h, 0), yp = e(0, h), ym = e(0, -h);
  double pp = e(h, h), pm = e(h, -h), mp = e(-h, h), mm = e(-h, -h);
  Jet2 j;
  j.v = c;
  j.g(0) = (xp - xm) / (2 * h);
  j.g(1) = (yp - ym) / (2 * h);
  j.h(0, 0) = (xp - 2 * c + xm) / (h * h);
  j.h(1, 1) = (yp - 2 * c + ym) / (h * h);
  j.h(0, 1) = j.h(1, 0) = (pp - pm - mp + mm) / (4 * h * h);
  return j;
}

// ---------------------------------------------------------------------------
// Scalar fields
// ---------------------------------------------------------------------------

class ScalarField {
 public:
  std::function<Jet2(const Vec2&)> eval;
  Backend backend = Backend::Analytic;
  double fd_step = 1e-4;

  ScalarField() = default;

  /// Analytic field from a functor on seeded Jet2 coordinates.
  template <typename F>
  static ScalarField analytic(F f) {
    ScalarField s;
    s.eval = [f](const Vec2& p) {
      return f(Jet2::variable(p(0), 0), Jet2::variable(p(1), 1));
    };
    return s;
  }

  static ScalarField finite_difference(std::function<double(const Vec2&)> f, double h = 1e-4) {
    ScalarField s;
    s.backend = Backend::FiniteDifference;
    s.fd_step = h;
    s.eval = [f, h](const Vec2& p) { return fd_jet(f, p, h); };
    return s;
  }

  Jet2 at(const Vec2& p) const {
    Jet2 j = eval(p);
    if (!j.finite())
      throw std::domain_error("ScalarField: non-finite jet at " + point_str(p));
    return j;
  }

  /// Chain-rule evaluation at general jet inputs.
  Jet2 at(const Jet2& x, const Jet2& y) const { return compose(eval(Vec2(x.v, y.v)), x, y); }

  double value(const Vec2& p) const { return eval(p).v; }
};

// ---------------------------------------------------------------------------
// Metric fields
// ---------------------------------------------------------------------------

struct MetricJets {
  Jet2 g11, g12, g22;

  Mat2 value() const {
    Mat2 m;
    m << g11.v, g12.v, g12.v, g22.v;
    return m;
  }
  Mat2J jets() const {
    Mat2J m;
    m(0, 0) = g11;
    m(0, 1) = g12;
    m(1, 0) = g12;
    m(1, 1) = g22;
    return m;
  }
};

class MetricField {
 public:
  std::function<MetricJets(const Vec2&)> eval;
  Backend backend = Backend::Analytic;
  double fd_step = 1e-4;
  double degeneracy_floor = 1e-14;

  MetricField() = default;

  template <typename F>
  static MetricField analytic(F f) {
    MetricField m;
    m.eval = [f](const Vec2& p) {
      return f(Jet2::variable(p(0), 0), Jet2::variable(p(1), 1));
    };
    return m;
  }

  /// Conformal metric e^{2f} |dz|^2 from the log-factor field.
  static MetricField conformal(ScalarField f) {
    MetricField m;
    m.backend = f.backend;
    m.fd_step = f.fd_step;
    m.eval = [f](const Vec2& p) {
      Jet2 e2f = exp(2.0 * f.eval(p));
      return MetricJets{e2f, Jet2(0.0), e2f};
    };
    return m;
  }

  static MetricField finite_difference(std::function<Mat2(const Vec2&)> f, double h = 1e-4) {
    MetricField m;
    m.backend = Backend::FiniteDifference;
    m.fd_step = h;
    m.eval = [f, h](const Vec2& p) {
      MetricJets j;
      j.g11 = fd_jet([&](const Vec2& q) { return f(q)(0, 0); }, p, h);
      j.g12 = fd_jet([&](const Vec2& q) { return f(q)(0, 1); }, p, h);
      j.g22 = fd_jet([&](const Vec2& q) { return f(q)(1, 1); }, p, h);
      return j;
    };
    return m;
  }

  static MetricField constant(const Mat2& g) {
    MetricField m;
    m.eval = [g](const Vec2&) { return MetricJets{Jet2(g(0, 0)), Jet2(g(0, 1)), Jet2(g(1, 1))}; };
    return m;
  }

  MetricJets at(const Vec2& p) const {
    MetricJets j = eval(p);
    double det = j.g11.v * j.g22.v - j.g12.v * j.g12.v;
    if (!(det > degeneracy_floor) || !(j.g11.v > 0.0))
      throw std::domain_error("MetricField: degenerate metric (det=" + std::to_string(det) +
                              ") at " + point_str(p));
    if (!j.g11.finite() || !j.g12.finite() || !j.g22.finite())
      throw std::domain_error("MetricField: non-finite coefficients at " + point_str(p));
    return j;
  }

  MetricJets at(const Jet2& x, const Jet2& y) const {
    MetricJets j = at(Vec2(x.v, y.v));
    return MetricJets{compose(j.g11, x, y), compose(j.g12, x, y), compose(j.g22, x, y)};
  }

  Mat2 value(const Vec2& p) const { return at(p).value(); }
};

// ---------------------------------------------------------------------------
// (1,1)-tensor fields
// ---------------------------------------------------------------------------

struct Tensor11Jets {
  Mat2J a;  // mixed components A^i_j with entry jets

  Mat2 value() const {
    Mat2 m;
    m << a(0, 0).v, a(0, 1).v, a(1, 0).v, a(1, 1).v;
    return m;
  }
  /// First derivative of the component matrix along coordinate k.
  Mat2 deriv(int k) const {
    Mat2 m;
    m << a(0, 0).g(k), a(0, 1).g(k), a(1, 0).g(k), a(1, 1).g(k);
    return m;
  }
};

class Tensor11Field {
 public:
  std::function<Tensor11Jets(const Vec2&)> eval;
  Backend backend = Backend::Analytic;
  double fd_step = 1e-4;

  Tensor11Field() = default;

  template <typename F>
  static Tensor11Field analytic(F f) {
    Tensor11Field t;
    t.eval = [f](const Vec2& p) {
      return Tensor11Jets{f(Jet2::variable(p(0), 0), Jet2::variable(p(1), 1))};
    };
    return t;
  }

  static Tensor11Field finite_difference(std::function<Mat2(const Vec2&)> f, double h = 1e-4) {
    Tensor11Field t;
    t.backend = Backend::FiniteDifference;
    t.fd_step = h;
    t.eval = [f, h](const Vec2& p) {
      Tensor11Jets j;
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
          j.a(r, c) = fd_jet([&](const Vec2& q) { return f(q)(r, c); }, p, h);
      return j;
    };
    return t;
  }

  static Tensor11Field constant(const Mat2& a) {
    Tensor11Field t;
    t.eval = [a](const Vec2&) {
      Tensor11Jets j;
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) j.a(r, c) = Jet2(a(r, c));
      return j;
    };
    return t;
  }

  Tensor11Jets at(const Vec2& p) const {
    Tensor11Jets j = eval(p);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        if (!j.a(r, c).finite())
          throw std::domain_error("Tensor11Field: non-finite entry at " + point_str(p));
    return j;
  }

  Mat2 value(const Vec2& p) const { return at(p).value(); }
};

// ---------------------------------------------------------------------------
// Chart maps (chart -> chart and chart -> R^3)
// ---------------------------------------------------------------------------

/// Third partial derivatives d3[a](i)(j,k) = d_i d_j d_k phi^a. Needed only
/// when second-order jets of a pullback metric must be exact.
using ThirdDeriv2 = std::array<std::array<Mat2, 2>, 2>;

inline ThirdDeriv2 zero_third() {
  ThirdDeriv2 d;
  for (auto& row : d)
    for (auto& m : row) m = Mat2::Zero();
  return d;
}

struct Map2Jets {
  std::array<Jet2, 2> c;
  std::optional<ThirdDeriv2> d3;

  Vec2 value() const { return {c[0].v, c[1].v}; }
  Mat2 jacobian() const {
    Mat2 J;
    J.row(0) = c[0].g.transpose();
    J.row(1) = c[1].g.transpose();
    return J;
  }
  /// Jet of the Jacobian entry d_i phi^a (Hessian slot filled from d3 when present).
  Jet2 deriv_jet(int a, int i) const {
    Jet2 j;
    j.v = c[a].g(i);
    j.g = c[a].h.row(i).transpose();
    j.h = d3 ? (*d3)[a][i] : Mat2::Zero();
    return j;
  }
};

class Map2 {
 public:
  std::function<Map2Jets(const Vec2&)> eval;
  std::function<Vec2(const Vec2&)> inverse_value;  // optional closed form
  bool exact_third = false;

  Map2() = default;

  template <typename F>
  static Map2 analytic(F f, bool third_derivs_vanish = false) {
    Map2 m;
    m.exact_third = third_derivs_vanish;
    m.eval = [f, third_derivs_vanish](const Vec2& p) {
      auto c = f(Jet2::variable(p(0), 0), Jet2::variable(p(1), 1));
      Map2Jets j{{c[0], c[1]}, std::nullopt};
      if (third_derivs_vanish) j.d3 = zero_third();
      return j;
    };
    return m;
  }

  template <typename F, typename D3>
  static Map2 analytic_with_third(F f, D3 d3fn) {
    Map2 m;
    m.exact_third = true;
    m.eval = [f, d3fn](const Vec2& p) {
      auto c = f(Jet2::variable(p(0), 0), Jet2::variable(p(1), 1));
      Map2Jets j{{c[0], c[1]}, d3fn(p)};
      return j;
    };
    return m;
  }

  static Map2 identity() {
    Map2 m = affine(Mat2::Identity(), Vec2::Zero());
    return m;
  }

  static Map2 affine(const Mat2& A, const Vec2& b) {
    Map2 m;
    m.exact_third = true;
    m.eval = [A, b](const Vec2& p) {
      Map2Jets j;
      for (int a = 0; a < 2; ++a) {
        j.c[a].v = A.row(a).dot(p) + b(a);
        j.c[a].g = A.row(a).transpose();
        j.c[a].h = Mat2::Zero();
      }
      j.d3 = zero_third();
      return j;
    };
    Mat2 Ainv = inv2(A);
    m.inverse_value = [Ainv, b](const Vec2& q) { return Ainv * (q - b); };
    return m;
  }

  static Map2 rotation(double psi) {
    Mat2 R;
    R << std::cos(psi), -std::sin(psi), std::sin(psi), std::cos(psi);
    return affine(R, Vec2::Zero());
  }

  /// Log-polar deck/rotation shift (t, theta) -> (t, theta + psi).
  static Map2 angle_shift(double psi) { return affine(Mat2::Identity(), Vec2(0.0, psi)); }

  Map2Jets at(const Vec2& p) const { return eval(p); }
  Vec2 value(const Vec2& p) const { return eval(p).value(); }
  Mat2 jacobian(const Vec2& p) const { return eval(p).jacobian(); }

  Vec2 invert(const Vec2& q, double tol = 1e-13, int max_iter = 60) const {
    if (inverse_value) return inverse_value(q);
    Vec2 p = q;
    for (int it = 0; it < max_iter; ++it) {
      Map2Jets j = eval(p);
      Vec2 r = j.value() - q;
      if (r.norm() < tol) return p;
      p -= inv2(Mat2(j.jacobian())) * r;
    }
    Map2Jets j = eval(p);
    if ((j.value() - q).norm() < 1e-10) return p;
    throw std::runtime_error("Map2::invert: Newton failed at " + point_str(q));
  }
};

/// Inverse map with jets via the inverse function theorem (second order).
inline Map2 inverse_map(const Map2& phi) {
  Map2 m;
  auto phi_eval = phi.eval;
  Map2 phicopy = phi;
  m.eval = [phicopy](const Vec2& q) {
    Vec2 p = phicopy.invert(q);
    Map2Jets f = phicopy.eval(p);
    Mat2 Jinv = inv2(Mat2(f.jacobian()));
    Map2Jets r;
    for (int a = 0; a < 2; ++a) {
      r.c[a].v = p(a);
      r.c[a].g = Jinv.row(a).transpose();
      // (phi^{-1})^a_{,jk} = - Jinv(a,b) phi^b_{,cd} Jinv(c,j) Jinv(d,k)
      Mat2 H = Mat2::Zero();
      for (int b = 0; b < 2; ++b) H += Jinv(a, b) * f.c[b].h;
      r.c[a].h = Jinv.transpose() * H * Jinv;
      r.c[a].h *= -1.0;
    }
    return r;
  };
  m.inverse_value = [phicopy](const Vec2& p) { return phicopy.value(p); };
  return m;
}

struct Map3Jets {
  std::array<Jet2, 3> c;

  Vec3 value() const { return {c[0].v, c[1].v, c[2].v}; }
  Eigen::Matrix<double, 3, 2> jacobian() const {
    Eigen::Matrix<double, 3, 2> J;
    for (int a = 0; a < 3; ++a) J.row(a) = c[a].g.transpose();
    return J;
  }
};

class Map3 {
 public:
  std::function<Map3Jets(const Vec2&)> eval;

  Map3() = default;

  template <typename F>
  static Map3 analytic(F f) {
    Map3 m;
    m.eval = [f](const Vec2& p) {
      auto c = f(Jet2::variable(p(0), 0), Jet2::variable(p(1), 1));
      return Map3Jets{{c[0], c[1], c[2]}};
    };
    return m;
  }

  Map3Jets at(const Vec2& p) const { return eval(p); }
  Vec3 value(const Vec2& p) const { return eval(p).value(); }
};

}  // namespace conegeo
