#pragma once

#include <cmath>

#include "conegeo/calculus.hpp"
#include "conegeo/chart.hpp"
#include "conegeo/cone.hpp"
#include "conegeo/quadrature.hpp"

namespace conegeo {

// Surface of revolution with constant Gaussian curvature one:
//   profile r(s) = c cos s, height h(s) = int_0^s sqrt(1 - c^2 sin^2 tau) dtau,
// parametrized by arclength s along the meridian. Principal curvatures are
// km = c cos s / h'(s) along the meridian and kp = 1/km along the parallel,
// so the shape operator has determinant one and its Gauss map is a minimal
// Lagrangian diffeomorphism onto its image.
struct RevolutionK1 {
  double c = 0.6;
  ChartDomain domain = ChartDomain::rectangle(-1.2, 1.2, 0.0, 2.0 * M_PI, 65, 129);

  static RevolutionK1 make(double c, int ns = 65, int ntheta = 129) {
    if (!(c > 0.0)) throw std::invalid_argument("RevolutionK1: c must be positive");
    double s_cap;
    if (c > 1.0) {
      // keep the radicand 1 - c^2 sin^2 s >= 0.01
      s_cap = std::asin(std::sqrt(0.99) / c) - 1e-3;
    } else {
      // stay away from the axis r = 0 on the default analysis window
      s_cap = M_PI / 2.0 - 0.3;
    }
    RevolutionK1 r;
    r.c = c;
    r.domain = ChartDomain::rectangle(-s_cap, s_cap, 0.0, 2.0 * M_PI, ns, ntheta);
    return r;
  }

  // Closed-form profile data; templated so the same expressions feed Jet2
  // fields and pointwise doubles.
  template <typename S>
  S radicand(const S& s) const {
    using std::sin;
    S sn = sin(s);
    return 1.0 - c * c * sn * sn;
  }
  template <typename S>
  S hprime(const S& s) const {
    using std::sqrt;
    return sqrt(radicand(s));
  }
  template <typename S>
  S radius(const S& s) const {
    using std::cos;
    return c * cos(s);
  }
  template <typename S>
  S kappa_m(const S& s) const {
    return radius(s) / hprime(s);
  }
  template <typename S>
  S kappa_p(const S& s) const {
    return hprime(s) / radius(s);
  }

  double height(double s) const {
    return integrate([this](double t) { return hprime(t); }, 0.0, s).value;
  }

  /// First fundamental form ds^2 + c^2 cos^2 s dtheta^2.
  MetricField first_form() const {
    double cc = c;
    return MetricField::analytic([cc](const Jet2& s, const Jet2& th) {
      (void)th;
      Jet2 r = cc * cos(s);
      return MetricJets{Jet2(1.0), Jet2(0.0), r * r};
    });
  }

  /// Third fundamental form km^2 ds^2 + (1 - c^2 sin^2 s) dtheta^2.
  MetricField third_form() const {
    RevolutionK1 self = *this;
    return MetricField::analytic([self](const Jet2& s, const Jet2& th) {
      (void)th;
      Jet2 km = self.kappa_m(s);
      return MetricJets{km * km, Jet2(0.0), self.radicand(s)};
    });
  }

  /// Shape operator diag(km, kp) with exact entry jets.
  Tensor11Field shape_operator() const {
    RevolutionK1 self = *this;
    return Tensor11Field::analytic([self](const Jet2& s, const Jet2& th) {
      (void)th;
      Mat2J a;
      a(0, 0) = self.kappa_m(s);
      a(0, 1) = Jet2(0.0);
      a(1, 0) = Jet2(0.0);
      a(1, 1) = self.kappa_p(s);
      return a;
    });
  }

  /// chi = (1/2) log |(r - h') / (r + h')|, the closed form of the
  /// eigenvalue potential for this surface.
  ScalarField chi_field() const {
    RevolutionK1 self = *this;
    return ScalarField::analytic([self](const Jet2& s, const Jet2& th) {
      (void)th;
      Jet2 r = self.radius(s), hp = self.hprime(s);
      return 0.5 * log(abs((r - hp) / (r + hp)));
    });
  }

  /// Embedding (r cos theta, r sin theta, h(s)); the height jet is assembled
  /// from the quadrature value and the closed-form h', h''.
  Map3 immersion() const {
    RevolutionK1 self = *this;
    Map3 m;
    m.eval = [self](const Vec2& p) {
      Jet2 s = Jet2::variable(p(0), 0), th = Jet2::variable(p(1), 1);
      Jet2 r = self.radius(s);
      Jet2 h;
      h.v = self.height(p(0));
      double hp = self.hprime(p(0));
      h.g = Vec2(hp, 0.0);
      h.h = Mat2::Zero();
      h.h(0, 0) = -self.c * self.c * std::sin(p(0)) * std::cos(p(0)) / hp;
      return Map3Jets{{r * cos(th), r * sin(th), h}};
    };
    return m;
  }

  /// Gauss map (h' cos theta, h' sin theta, c sin s), valued in the unit sphere.
  Map3 gauss_map() const {
    RevolutionK1 self = *this;
    return Map3::analytic([self](const Jet2& s, const Jet2& th) {
      Jet2 hp = self.hprime(s);
      return std::array<Jet2, 3>{hp * cos(th), hp * sin(th), self.c * sin(s)};
    });
  }

  // ---- cone end (c < 1): the chart s(t) = pi/2 - 2 atan(e^{c t}) turns the
  // first fundamental form into exactly the spherical cone metric of angle
  // 2 pi c in log-polar form.
  Map2 cone_chart() const {
    double cc = c;
    return Map2::analytic([cc](const Jet2& t, const Jet2& th) {
      Jet2 s = M_PI / 2.0 - 2.0 * atan(exp(cc * t));
      return std::array<Jet2, 2>{s, th};
    });
  }

  // ---- G-conformal chart: tau(s) with dtau/ds = (1+km)/((1+kp) r) makes
  // G = (1/4) g1((1+b).,(1+b).) conformal, G = e^{2F}(dtau^2 + dtheta^2)
  // with e^{2F} = (1/4)(1+kp)^2 r^2 = (1/4)(r + h')^2.

  double tau_rate(double s) const {
    return (1.0 + kappa_m(s)) / ((1.0 + kappa_p(s)) * radius(s));
  }

  double tau_of_s(double s) const {
    return integrate([this](double t) { return tau_rate(t); }, 0.0, s).value;
  }

  double s_of_tau(double tau) const {
    double s = 0.0;
    for (int it = 0; it < 80; ++it) {
      double r = tau_of_s(s) - tau;
      if (std::abs(r) < 1e-14) return s;
      s -= r / tau_rate(s);
      s = std::clamp(s, domain.x_min - 0.05, domain.x_max + 0.05);
    }
    return s;
  }

  /// Jet of s as a function of tau: s' = 1/tau'(s), s'' = -tau''(s) s'^3.
  Jet2 s_jet_of_tau(double tau) const {
    double s = s_of_tau(tau);
    // tau'' via a univariate jet of the closed-form rate
    Jet2 sv = Jet2::variable(s, 0);
    Jet2 rate = (1.0 + kappa_m(sv)) / ((1.0 + kappa_p(sv)) * radius(sv));
    double tp = rate.v, tpp = rate.g(0);
    Jet2 j;
    j.v = s;
    j.g = Vec2(1.0 / tp, 0.0);
    j.h = Mat2::Zero();
    j.h(0, 0) = -tpp / (tp * tp * tp);
    return j;
  }

  /// Chart map (tau, theta) -> (s, theta) with exact second-order jets.
  Map2 conformal_chart() const {
    RevolutionK1 self = *this;
    Map2 m;
    m.eval = [self](const Vec2& p) {
      Map2Jets j;
      j.c[0] = self.s_jet_of_tau(p(0));
      j.c[1] = Jet2::variable(p(1), 1);
      return j;
    };
    m.inverse_value = [self](const Vec2& q) { return Vec2(self.tau_of_s(q(0)), q(1)); };
    return m;
  }

  /// G in the conformal chart: (1/4)(r + h')^2 (dtau^2 + dtheta^2).
  MetricField G_conformal() const {
    RevolutionK1 self = *this;
    MetricField m;
    m.eval = [self](const Vec2& p) {
      Jet2 s = self.s_jet_of_tau(p(0));
      Jet2 w = 0.5 * (self.radius(s) + self.hprime(s));
      Jet2 coef = w * w;
      return MetricJets{coef, Jet2(0.0), coef};
    };
    return m;
  }

  /// B in the conformal chart: diag((r-h')/(r+h'), -(r-h')/(r+h')).
  Tensor11Field B_conformal() const {
    RevolutionK1 self = *this;
    Tensor11Field t;
    t.eval = [self](const Vec2& p) {
      Jet2 s = self.s_jet_of_tau(p(0));
      Jet2 r = self.radius(s), hp = self.hprime(s);
      Jet2 lam = (r - hp) / (r + hp);
      Tensor11Jets j;
      j.a(0, 0) = lam;
      j.a(0, 1) = Jet2(0.0);
      j.a(1, 0) = Jet2(0.0);
      j.a(1, 1) = -lam;
      return j;
    };
    return t;
  }
};

/// Circumference-over-distance cone-angle estimate at meridian parameter s,
/// measured from the metric by quadrature: 2 pi sqrt(g_tt(s)) normalized by
/// the radial distance int_s^{s_apex} sqrt(g_ss) dsigma.
inline double cone_angle_estimate(const MetricField& g, double s, double s_apex) {
  double circ = 2.0 * M_PI * std::sqrt(g.value(Vec2(s, 0.0))(1, 1));
  double dist = integrate(
                    [&g](double sigma) { return std::sqrt(g.value(Vec2(sigma, 0.0))(0, 0)); }, s,
                    s_apex, 1e-12)
                    .value;
  return circ / dist;
}

/// Richardson extrapolation of the estimate in the apex distance sigma0,
/// cancelling the O(sigma^2) smoothing term.
inline double cone_angle_richardson(const MetricField& g, double s_apex, double sigma0) {
  double a1 = cone_angle_estimate(g, s_apex - sigma0, s_apex);
  double a2 = cone_angle_estimate(g, s_apex - sigma0 / 2.0, s_apex);
  return (4.0 * a2 - a1) / 3.0;
}

}  // namespace conegeo
