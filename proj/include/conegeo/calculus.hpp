#pragma once

#include <Eigen/LU>

#include "conegeo/fields.hpp"

namespace conegeo {

/// Levi-Civita symbols Gamma^k_{ij}, symmetric in (i,j).
struct Christoffel {
  double G[2][2][2] = {};  // [k][i][j]
};

inline Christoffel christoffel_from_jets(const MetricJets& gj) {
  Mat2 g = gj.value();
  Mat2 ginv = inv2(g);
  // dg[l](i,j) = d_l g_ij
  Mat2 dg[2];
  for (int l = 0; l < 2; ++l) {
    dg[l](0, 0) = gj.g11.g(l);
    dg[l](0, 1) = dg[l](1, 0) = gj.g12.g(l);
    dg[l](1, 1) = gj.g22.g(l);
  }
  Christoffel c;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double s = 0;
        for (int l = 0; l < 2; ++l) s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        c.G[k][i][j] = 0.5 * s;
      }
  return c;
}

inline Christoffel christoffel(const MetricField& g, const Vec2& p) {
  return christoffel_from_jets(g.at(p));
}

/// Sectional curvature by the Brioschi formula (exact given second-order
/// coefficient jets).
inline double gauss_curvature_from_jets(const MetricJets& gj) {
  const Jet2& E = gj.g11;
  const Jet2& F = gj.g12;
  const Jet2& G = gj.g22;
  double Eu = E.g(0), Ev = E.g(1), Gu = G.g(0), Gv = G.g(1), Fu = F.g(0), Fv = F.g(1);
  double Evv = E.h(1, 1), Guu = G.h(0, 0), Fuv = F.h(0, 1);
  Eigen::Matrix3d M1, M2;
  M1 << -0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev,
        Fv - 0.5 * Gu, E.v, F.v,
        0.5 * Gv, F.v, G.v;
  M2 << 0.0, 0.5 * Ev, 0.5 * Gu,
        0.5 * Ev, E.v, F.v,
        0.5 * Gu, F.v, G.v;
  double det = E.v * G.v - F.v * F.v;
  return (M1.determinant() - M2.determinant()) / (det * det);
}

inline double gauss_curvature(const MetricField& g, const Vec2& p) {
  return gauss_curvature_from_jets(g.at(p));
}

/// Laplace-Beltrami in divergence form,
///   (1/sqrt(det g)) d_i ( sqrt(det g) g^{ij} d_j u ),
/// expanded with exact coefficient derivatives from the metric jets. This is
/// an independent route from the Christoffel/Hessian one in hess11.
inline double laplace_beltrami(const MetricJets& gj, const Jet2& u) {
  Mat2J gJ = gj.jets();
  Mat2J ginv = inv2(gJ);
  Jet2 w = sqrt(det2(gJ));
  double lap = 0.0;
  for (int i = 0; i < 2; ++i) {
    // P^i = w g^{ij} u_j; only first derivatives of P^i are needed, so the
    // (unavailable) third derivatives of u never enter.
    Jet2 P(0.0);
    for (int j = 0; j < 2; ++j) {
      Jet2 uj;
      uj.v = u.g(j);
      uj.g = u.h.row(j).transpose();
      P += w * ginv(i, j) * uj;
    }
    lap += P.g(i);
  }
  return lap / w.v;
}

inline double laplace_beltrami(const MetricField& g, const ScalarField& u, const Vec2& p) {
  return laplace_beltrami(g.at(p), u.at(p));
}

/// Hessian of u as a (1,1) tensor: nabla grad u = g^{-1} (Hess u)_lower with
/// (Hess u)_{ij} = u_,ij - Gamma^k_ij u_,k.
inline Mat2 hess11(const MetricJets& gj, const Jet2& u) {
  Christoffel c = christoffel_from_jets(gj);
  Mat2 H;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = u.h(i, j);
      for (int k = 0; k < 2; ++k) s -= c.G[k][i][j] * u.g(k);
      H(i, j) = s;
    }
  return inv2(gj.value()) * H;
}

inline Mat2 hess11(const MetricField& g, const ScalarField& u, const Vec2& p) {
  return hess11(g.at(p), u.at(p));
}

/// d^nabla A evaluated on the coordinate frame ([d_1, d_2] = 0):
/// r^k = D_1 A^k_2 - D_2 A^k_1 + Gamma^k_{1m} A^m_2 - Gamma^k_{2m} A^m_1.
inline Vec2 codazzi_residual(const MetricJets& gj, const Tensor11Jets& aj) {
  Christoffel c = christoffel_from_jets(gj);
  Mat2 A = aj.value();
  Mat2 d0 = aj.deriv(0), d1 = aj.deriv(1);
  Vec2 r;
  for (int k = 0; k < 2; ++k) {
    double s = d0(k, 1) - d1(k, 0);
    for (int m = 0; m < 2; ++m) s += c.G[k][0][m] * A(m, 1) - c.G[k][1][m] * A(m, 0);
    r(k) = s;
  }
  return r;
}

inline Vec2 codazzi_residual(const MetricField& g, const Tensor11Field& A, const Vec2& p) {
  return codazzi_residual(g.at(p), A.at(p));
}

/// Pullback phi^* g2 as a metric field on the source chart. Coefficient jets
/// are exact to second order when the map carries third derivatives;
/// otherwise the Hessian slots fall back to centered differences of the
/// pointwise pullback.
inline MetricField pullback_metric(const Map2& phi, const MetricField& g2) {
  MetricField m;
  m.backend = g2.backend;
  m.fd_step = g2.fd_step;
  auto pointwise = [phi, g2](const Vec2& p) -> Mat2 {
    Map2Jets f = phi.at(p);
    Mat2 J = f.jacobian();
    if (std::abs(det2(J)) < 1e-14)
      throw std::domain_error("pullback_metric: rank-deficient Jacobian at " + point_str(p));
    Mat2 g = g2.value(f.value());
    return J.transpose() * g * J;
  };
  bool exact = phi.exact_third;
  m.eval = [phi, g2, pointwise, exact](const Vec2& p) -> MetricJets {
    Map2Jets f = phi.at(p);
    Mat2 Jv = f.jacobian();
    if (std::abs(det2(Jv)) < 1e-14)
      throw std::domain_error("pullback_metric: rank-deficient Jacobian at " + point_str(p));
    if (exact && f.d3) {
      MetricJets gt = g2.at(f.c[0], f.c[1]);  // target coefficients composed with phi
      Mat2J gJ = gt.jets();
      // J-entry jets carry second derivatives from d3.
      Mat2J res;
      for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) {
          Jet2 s(0.0);
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              s += f.deriv_jet(a, i) * gJ(a, b) * f.deriv_jet(b, j);
          res(i, j) = s;
        }
      return MetricJets{res(0, 0), res(0, 1), res(1, 1)};
    }
    // Mixed route: exact values and first derivatives via composition of
    // available jets; Hessian by finite differences of the pointwise pullback.
    double h = g2.fd_step;
    MetricJets out;
    Jet2* slots[3] = {&out.g11, &out.g12, &out.g22};
    int idx[3][2] = {{0, 0}, {0, 1}, {1, 1}};
    for (int s = 0; s < 3; ++s) {
      auto entry = [&](const Vec2& q) { return pointwise(q)(idx[s][0], idx[s][1]); };
      *slots[s] = fd_jet(entry, p, h);
    }
    // Overwrite value and gradient with the exact chain-rule quantities.
    MetricJets gt = g2.at(f.c[0], f.c[1]);
    Mat2J gJ = gt.jets();
    for (int s = 0; s < 3; ++s) {
      int i = idx[s][0], j = idx[s][1];
      Jet2 exact_fo(0.0);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          Jet2 Ji, Jj;
          Ji.v = f.c[a].g(i);
          Ji.g = f.c[a].h.row(i).transpose();
          Jj.v = f.c[b].g(j);
          Jj.g = f.c[b].h.row(j).transpose();
          exact_fo += Ji * gJ(a, b) * Jj;
        }
      slots[s]->v = exact_fo.v;
      slots[s]->g = exact_fo.g;
    }
    return out;
  };
  return m;
}

/// Pullback of a target-space metric under an immersion into R^3 (first-order
/// jets; used for developing-map isometry checks and fundamental forms).
inline MetricField pullback_metric3(const Map3& f, std::function<Mat2(const Vec3&)> ambient_restriction) {
  // Not needed in general; immersions provide their fundamental forms directly.
  (void)f;
  (void)ambient_restriction;
  throw std::logic_error("unused");
}

/// Max of the two residuals of the connection/curvature transfer for
/// h = g(A., A.): connection residual against A^{-1} nabla^g_v (A w) on the
/// coordinate frame, and |K_h - K_g / det A|.
inline double connection_transfer_check(const MetricField& g, const Tensor11Field& A,
                                        const Vec2& p) {
  MetricJets gj = g.at(p);
  Tensor11Jets aj = A.at(p);
  Mat2 Av = aj.value();
  double dA = det2(Av);
  if (std::abs(dA) < 1e-14)
    throw std::domain_error("connection_transfer_check: singular tensor at " + point_str(p));
  Mat2 Ainv = inv2(Av);

  // h = g(A., A.): coefficient jets by Jet2 algebra.
  Mat2J gJ = gj.jets();
  Mat2J AJ = aj.a;
  Mat2J hJ;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Jet2 s(0.0);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) s += AJ(a, i) * gJ(a, b) * AJ(b, j);
      hJ(i, j) = s;
    }
  MetricJets hj{hJ(0, 0), hJ(0, 1), hJ(1, 1)};

  Christoffel ch = christoffel_from_jets(hj);
  Christoffel cg = christoffel_from_jets(gj);
  double conn_res = 0.0;
  for (int v = 0; v < 2; ++v)
    for (int w = 0; w < 2; ++w) {
      // nabla^g_v (A e_w) has components d_v A^k_w + Gamma^k_{v m} A^m_w.
      Vec2 cov;
      for (int k = 0; k < 2; ++k) {
        double s = aj.deriv(v)(k, w);
        for (int mI = 0; mI < 2; ++mI) s += cg.G[k][v][mI] * Av(mI, w);
        cov(k) = s;
      }
      Vec2 rhs = Ainv * cov;
      Vec2 lhs;
      for (int k = 0; k < 2; ++k) lhs(k) = ch.G[k][v][w];
      conn_res = std::max(conn_res, (lhs - rhs).norm());
    }

  double Kg = gauss_curvature_from_jets(gj);
  double Kh = gauss_curvature_from_jets(hj);
  double curv_res = std::abs(Kh - Kg / dA);
  return std::max(conn_res, curv_res);
}

}  // namespace conegeo
