#pragma once

#include <cmath>
#include <optional>

#include "conegeo/calculus.hpp"
#include "conegeo/chart.hpp"
#include "conegeo/fields.hpp"
#include "conegeo/quadrature.hpp"

namespace conegeo {

// Cone metrics e^{2f} |z|^{2 alpha - 2} |dz|^2 on a punctured disc, their
// spherical (curvature +1) representatives, and the developing map of the
// lifted spherical metric on the universal cover.

struct ConeData {
  double alpha = 0.5;
  // Optional log-factor f in the z-chart; empty means f = 0.
  std::optional<ScalarField> f;
  ChartDomain domain = ChartDomain::log_polar(-8.0, -0.05, 2.0 * M_PI, 33, 65);

  void validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("ConeData: alpha must be positive");
    domain.validate();
    if (f) {
      double fmax = 0.0;
      for (const Vec2& p : domain.nodes()) {
        Vec2 z = kind_to_z(p);
        double v = f->value(z);
        if (!std::isfinite(v)) throw std::invalid_argument("ConeData: f non-finite on grid");
        fmax = std::max(fmax, std::abs(v));
      }
      if (fmax > 50.0) throw std::invalid_argument("ConeData: f unbounded on grid");
    }
  }

  Vec2 kind_to_z(const Vec2& p) const {
    if (domain.kind == ChartDomain::Kind::LogPolar)
      return {std::exp(p(0)) * std::cos(p(1)), std::exp(p(0)) * std::sin(p(1))};
    return p;
  }
};

/// General cone metric in the z-chart: e^{2f} (x^2+y^2)^{alpha-1} |dz|^2.
inline MetricField cone_metric_z(const ConeData& c) {
  c.validate();
  double alpha = c.alpha;
  std::optional<ScalarField> f = c.f;
  MetricField m;
  m.eval = [alpha, f](const Vec2& p) {
    Jet2 x = Jet2::variable(p(0), 0), y = Jet2::variable(p(1), 1);
    Jet2 r2 = x * x + y * y;
    Jet2 coef = pow(r2, alpha - 1.0);
    if (f) coef = coef * exp(2.0 * f->at(x, y));
    return MetricJets{coef, Jet2(0.0), coef};
  };
  return m;
}

/// Same metric pulled to log-polar coordinates (t, theta), z = e^{t+i theta}:
/// e^{2f(z(t,theta))} e^{2 alpha t} (dt^2 + dtheta^2).
inline MetricField cone_metric_logpolar(const ConeData& c) {
  c.validate();
  double alpha = c.alpha;
  std::optional<ScalarField> f = c.f;
  MetricField m;
  m.eval = [alpha, f](const Vec2& p) {
    Jet2 t = Jet2::variable(p(0), 0), th = Jet2::variable(p(1), 1);
    Jet2 coef = exp(2.0 * alpha * t);
    if (f) {
      Jet2 r = exp(t);
      coef = coef * exp(2.0 * f->at(r * cos(th), r * sin(th)));
    }
    return MetricJets{coef, Jet2(0.0), coef};
  };
  return m;
}

/// Curvature +1 cone metric in the z-chart:
/// 4 alpha^2 |z|^{2 alpha - 2} / (1 + |z|^{2 alpha})^2 |dz|^2.
inline MetricField spherical_cone_metric(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("spherical_cone_metric: alpha must be positive");
  MetricField m;
  m.eval = [alpha](const Vec2& p) {
    Jet2 x = Jet2::variable(p(0), 0), y = Jet2::variable(p(1), 1);
    Jet2 r2 = x * x + y * y;
    Jet2 ra = pow(r2, alpha);  // |z|^{2 alpha}
    Jet2 coef = 4.0 * alpha * alpha * pow(r2, alpha - 1.0) / ((1.0 + ra) * (1.0 + ra));
    return MetricJets{coef, Jet2(0.0), coef};
  };
  return m;
}

/// The alpha = 1 case: the round sphere in the stereographic chart.
inline MetricField round_metric() {
  MetricField m;
  m.eval = [](const Vec2& p) {
    Jet2 x = Jet2::variable(p(0), 0), y = Jet2::variable(p(1), 1);
    Jet2 d = 1.0 + x * x + y * y;
    Jet2 coef = 4.0 / (d * d);
    return MetricJets{coef, Jet2(0.0), coef};
  };
  return m;
}

/// Spherical cone metric on the log-polar cover:
/// 4 alpha^2 e^{2 alpha t} / (1 + e^{2 alpha t})^2 (dt^2 + dtheta^2).
inline MetricField spherical_cone_metric_logpolar(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("spherical_cone_metric: alpha must be positive");
  MetricField m;
  m.eval = [alpha](const Vec2& p) {
    Jet2 t = Jet2::variable(p(0), 0);
    Jet2 e = exp(2.0 * alpha * t);
    Jet2 coef = 4.0 * alpha * alpha * e / ((1.0 + e) * (1.0 + e));
    return MetricJets{coef, Jet2(0.0), coef};
  };
  // the conformal factor underflows deep in the cusp without being degenerate
  m.degeneracy_floor = 1e-300;
  return m;
}

/// Developing map of the lifted spherical cone metric,
///   dev(t, theta) = Pi^{-1}(e^{alpha (t + i theta)}),
/// with Pi^{-1}(zeta) = (2 Re zeta, 2 Im zeta, 1 - |zeta|^2) / (1 + |zeta|^2),
/// so the puncture t -> -inf develops to the pole (0, 0, 1).
inline Map3 developing_map(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("developing_map: alpha must be positive");
  return Map3::analytic([alpha](const Jet2& t, const Jet2& th) {
    Jet2 w = exp(alpha * t);
    Jet2 re = w * cos(alpha * th), im = w * sin(alpha * th);
    Jet2 denom = 1.0 + w * w;
    return std::array<Jet2, 3>{2.0 * re / denom, 2.0 * im / denom, (1.0 - w * w) / denom};
  });
}

/// First fundamental form of an immersion into R^3 (pointwise values).
inline Mat2 first_fundamental_form(const Map3& f, const Vec2& p) {
  auto J = f.at(p).jacobian();
  return (J.transpose() * J).eval();
}

inline Vec3 rotate_z(double angle, const Vec3& v) {
  double c = std::cos(angle), s = std::sin(angle);
  return {c * v(0) - s * v(1), s * v(0) + c * v(1), v(2)};
}

/// Max over the grid of || dev(t, theta + 2 pi) - R_{2 pi alpha} dev(t, theta) ||.
inline double equivariance_residual(const Map3& dev, double alpha, const ChartDomain& grid) {
  double worst = 0.0;
  for (const Vec2& p : grid.nodes()) {
    Vec3 shifted = dev.value(Vec2(p(0), p(1) + 2.0 * M_PI));
    Vec3 rotated = rotate_z(2.0 * M_PI * alpha, dev.value(p));
    worst = std::max(worst, (shifted - rotated).norm());
  }
  return worst;
}

/// Area of the annulus r0 <= |z| <= 1 in spherical_cone_metric(alpha);
/// closed form of the radial integral, used as the quadrature target.
inline double spherical_cone_annulus_area(double alpha, double r0) {
  double ra = std::pow(r0, 2.0 * alpha);
  return 4.0 * M_PI * alpha * (1.0 / (1.0 + ra) - 0.5);
}

}  // namespace conegeo
