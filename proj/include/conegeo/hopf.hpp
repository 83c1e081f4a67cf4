#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "conegeo/mlmap.hpp"

namespace conegeo {

using Complex = std::complex<double>;

/// Quadratic differential q = hq(z) dz^2 in a conformal chart for G, together
/// with the conformal factor f (G = e^{2f} |dz|^2).
struct QuadDifferential {
  std::function<Complex(const Vec2&)> hq;
  std::function<double(const Vec2&)> f;
  double h_fd = 1e-4;   // first derivatives
  double h_lap = 5e-3;  // flat Laplacians, fourth-order stencil
  double mask_threshold = 1e-12;

  Complex dz(const Vec2& p) const {
    Complex ax = (hq(p + Vec2(h_fd, 0)) - hq(p - Vec2(h_fd, 0))) / (2.0 * h_fd);
    Complex ay = (hq(p + Vec2(0, h_fd)) - hq(p - Vec2(0, h_fd))) / (2.0 * h_fd);
    return 0.5 * (ax - Complex(0, 1) * ay);
  }
  Complex dzbar(const Vec2& p) const {
    Complex ax = (hq(p + Vec2(h_fd, 0)) - hq(p - Vec2(h_fd, 0))) / (2.0 * h_fd);
    Complex ay = (hq(p + Vec2(0, h_fd)) - hq(p - Vec2(0, h_fd))) / (2.0 * h_fd);
    return 0.5 * (ax + Complex(0, 1) * ay);
  }

  /// chi0 = (1/4) log |hq|^2; NaN where hq is masked.
  double chi0(const Vec2& p) const {
    double m = std::abs(hq(p));
    if (m < mask_threshold) return std::numeric_limits<double>::quiet_NaN();
    return 0.5 * std::log(m);
  }
};

/// Relative deviation of G from a conformal metric at one point.
inline double conformal_anisotropy(const Mat2& Gv) {
  return (std::abs(Gv(0, 0) - Gv(1, 1)) + 2.0 * std::abs(Gv(0, 1))) / std::abs(Gv(0, 0));
}

/// Re(q) as a bilinear form has the matrix [[Re hq, -Im hq], [-Im hq, -Re hq]]
/// and must equal G(B., .), so hq = G(B dx, dx) - i G(B dx, dy).
inline QuadDifferential hopf_from_GB(const GBpair& gb, const ChartDomain& grid,
                                     double conformal_tol = 1e-10,
                                     ResidualReport* rep = nullptr) {
  for (const Vec2& p : grid.nodes()) {
    double a = conformal_anisotropy(gb.G_point(p));
    if (a > conformal_tol) {
      std::ostringstream os;
      os << "hopf_from_GB: chart not conformal for G, anisotropy " << a << " at (" << p(0)
         << ", " << p(1) << ")";
      throw std::domain_error(os.str());
    }
  }

  QuadDifferential qd;
  auto G_point = gb.G_point;
  auto B_point = gb.B_point;
  qd.hq = [G_point, B_point](const Vec2& p) {
    Mat2 M = G_point(p) * B_point(p);
    return Complex(M(0, 0), -M(0, 1));
  };
  qd.f = [G_point](const Vec2& p) { return 0.5 * std::log(G_point(p)(0, 0)); };
  qd.mask_threshold = gb.mask_threshold;

  if (rep) {
    Stat recon;
    for (const Vec2& p : grid.nodes()) {
      Mat2 M = gb.G_point(p) * gb.B_point(p);
      Complex h = qd.hq(p);
      Mat2 req;
      req << h.real(), -h.imag(), -h.imag(), -h.real();
      recon.add((M - req).cwiseAbs().maxCoeff());
    }
    rep->residuals["hopf_reconstruction"] = recon;
  }
  return qd;
}

inline void holomorphy_residual(const QuadDifferential& qd, const ChartDomain& grid,
                                ResidualReport& rep) {
  Stat cr;
  for (const Vec2& p : grid.nodes()) cr.add(std::abs(qd.dzbar(p)));
  rep.residuals["cauchy_riemann"] = cr;
}

namespace detail {

// fourth-order flat Laplacian; the balance against roundoff allows a much
// larger step than a second-order stencil would
inline double flat_laplacian(const std::function<double(const Vec2&)>& u, const Vec2& p,
                             double h) {
  auto d2 = [&](const Vec2& e) {
    return (-u(p + 2.0 * h * e) + 16.0 * u(p + h * e) - 30.0 * u(p) + 16.0 * u(p - h * e) -
            u(p - 2.0 * h * e)) /
           (12.0 * h * h);
  };
  return d2(Vec2(1, 0)) + d2(Vec2(0, 1));
}

}  // namespace detail

/// chi0_gradient: d_z chi0 = (d_z hq) / (4 hq);  chi0_harmonic: flat Laplacian
/// of chi0 vanishes wherever hq is holomorphic and nonzero.
inline void chi0_identities(const QuadDifferential& qd, const ChartDomain& grid,
                            ResidualReport& rep) {
  Stat grad, harm;
  auto chi0 = [&qd](const Vec2& p) { return qd.chi0(p); };
  for (const Vec2& p : grid.nodes()) {
    Complex h = qd.hq(p);
    if (std::abs(h) < qd.mask_threshold) {
      grad.add_masked();
      harm.add_masked();
      continue;
    }
    double cx = (chi0(p + Vec2(qd.h_fd, 0)) - chi0(p - Vec2(qd.h_fd, 0))) / (2.0 * qd.h_fd);
    double cy = (chi0(p + Vec2(0, qd.h_fd)) - chi0(p - Vec2(0, qd.h_fd))) / (2.0 * qd.h_fd);
    Complex dchi = 0.5 * Complex(cx, -cy);
    grad.add(std::abs(dchi - qd.dz(p) / (4.0 * h)));
    harm.add(std::abs(detail::flat_laplacian(chi0, p, qd.h_lap)));
  }
  rep.residuals["chi0_gradient"] = grad;
  rep.residuals["chi0_harmonic"] = harm;
}

/// conformal_chain: chi0 = chi + f;
/// conformal_factor_identity: -e^{-2f} Delta_0 f = K_G.
inline void conformal_change_check(const GBpair& gb, const QuadDifferential& qd,
                                   const ChartDomain& grid, ResidualReport& rep) {
  Stat chain, factor;
  for (const Vec2& p : grid.nodes()) {
    Spectral s = spectral(gb, p);
    if (s.masked)
      chain.add_masked();
    else
      chain.add(std::abs(qd.chi0(p) - (s.chi + qd.f(p))));
    double lap_f = detail::flat_laplacian(qd.f, p, qd.h_lap);
    double K = gauss_curvature_from_jets(gb.G.at(p));
    factor.add(std::abs(-std::exp(-2.0 * qd.f(p)) * lap_f - K));
  }
  rep.residuals["conformal_chain"] = chain;
  rep.residuals["conformal_factor_identity"] = factor;
}

/// The graph-minimality decompositions tying (g1, phi^*g2) to (G, B), plus
/// Cayley-Hamilton for the traceless B.  All identities are pointwise algebra.
inline void graph_minimality_decomposition(const LagrangianPair& pair, const GBpair& gb,
                                           const ChartDomain& grid, ResidualReport& rep) {
  Stat dg1, dg2, dG, ch;
  for (const Vec2& p : grid.nodes()) {
    Mat2 g1v = pair.g1.value(p);
    Mat2 pg2 = pullback_value(pair.phi, pair.g2, p);
    Mat2 Gv = gb.G_point(p);
    Mat2 Bv = gb.B_point(p);
    double dB = det2(Bv);
    Mat2 GB = Gv * Bv;
    dg1.add((g1v - ((1.0 - dB) * Gv - 2.0 * GB)).cwiseAbs().maxCoeff());
    dg2.add((pg2 - ((1.0 - dB) * Gv + 2.0 * GB)).cwiseAbs().maxCoeff());
    ch.add((Bv * Bv + dB * Mat2::Identity()).cwiseAbs().maxCoeff());
    if (gb.b_point) {
      double trb = tr2(gb.b_point(p));
      if (!(trb > 0.0))
        throw std::logic_error("graph_minimality_decomposition: tr b <= 0 for an SPD b");
      dG.add((Gv - 0.25 * (1.0 + 2.0 / trb) * (g1v + pg2)).cwiseAbs().maxCoeff());
    }
  }
  rep.residuals["decomposition_g1"] = dg1;
  rep.residuals["decomposition_g2"] = dg2;
  rep.residuals["cayley_hamilton"] = ch;
  if (gb.b_point) rep.residuals["decomposition_G"] = dG;
}

/// Flat synthetic model: G = |dz|^2 and B = G^{-1} Re(hq dz^2) for a
/// prescribed coefficient; B is Codazzi exactly when hq is holomorphic.
inline GBpair flat_hopf_model(std::function<Complex(const Vec2&)> hq, double h_fd = 1e-4) {
  MetricField G = MetricField::constant(Mat2::Identity());
  Tensor11Field B = Tensor11Field::finite_difference(
      [hq](const Vec2& p) {
        Complex h = hq(p);
        Mat2 b;
        b << h.real(), -h.imag(), -h.imag(), -h.real();
        return b;
      },
      h_fd);
  return gb_from_fields(G, B);
}

}  // namespace conegeo
