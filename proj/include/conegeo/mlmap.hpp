#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "conegeo/calculus.hpp"
#include "conegeo/chart.hpp"
#include "conegeo/report.hpp"

namespace conegeo {

// Extraction of b from a candidate minimal Lagrangian map, the associated
// (G, B) pair, the eigenvalue potential chi, and the identity certificates.

struct LagrangianPair {
  MetricField g1, g2;
  Map2 phi;
  ChartDomain domain = ChartDomain::rectangle(0, 1, 0, 1, 33, 33);
  double h_fd = 1e-4;
  // Closed-form b with exact entry jets, when the example provides one; the
  // default jets come from finite differences of the pointwise solve.
  std::optional<Tensor11Field> b_analytic;
};

/// Pointwise pullback (phi^* g2)(p) from first-order map jets.
inline Mat2 pullback_value(const Map2& phi, const MetricField& g2, const Vec2& p) {
  Map2Jets f = phi.at(p);
  Mat2 J = f.jacobian();
  if (std::abs(det2(J)) < 1e-14)
    throw std::domain_error("pullback_value: rank-deficient Jacobian at " + point_str(p));
  return J.transpose() * g2.value(f.value()) * J;
}

/// b at a point: the g1-self-adjoint positive square root of
/// M = g1^{-1} (phi^* g2), by the closed-form 2x2 root.
inline Mat2 compute_b(const LagrangianPair& pair, const Vec2& p) {
  Mat2 g1v = pair.g1.value(p);
  Mat2 M = inv2(g1v) * pullback_value(pair.phi, pair.g2, p);
  double d = det2(M);
  double t = tr2(M);
  if (!(d > 0.0) || !(t + 2.0 * std::sqrt(d) > 0.0))
    throw std::domain_error("compute_b: g1^{-1} phi^*g2 not positive at " + point_str(p));
  return sqrt_psd2(M);
}

/// b as a tensor field: closed form when supplied, else finite-difference
/// jets of the pointwise solve (step pair.h_fd).
inline Tensor11Field b_field(const LagrangianPair& pair) {
  if (pair.b_analytic) return *pair.b_analytic;
  LagrangianPair copy = pair;
  return Tensor11Field::finite_difference(
      [copy](const Vec2& p) { return compute_b(copy, p); }, pair.h_fd);
}

/// Self-adjointness defect of b with respect to g1: asymmetry of g1(b.,.).
inline double self_adjoint_residual(const Mat2& g1v, const Mat2& b) {
  Mat2 low = g1v * b;
  return std::abs(low(0, 1) - low(1, 0));
}

/// det b - 1, Codazzi residual of b for g1, and the redundancy cross-check
/// |K_{phi^*g2} - K_{g1}/det b| built on the curvature-transfer identity.
inline void lagrangian_residuals(const LagrangianPair& pair, const ChartDomain& grid,
                                 ResidualReport& rep) {
  Tensor11Field b = b_field(pair);
  MetricField pb = pullback_metric(pair.phi, pair.g2);
  for (const Vec2& p : grid.nodes()) {
    Mat2 bv = compute_b(pair, p);
    rep.stat("det_b_minus_1").add(det2(bv) - 1.0);
    rep.stat("b_self_adjoint").add(self_adjoint_residual(pair.g1.value(p), bv));
    rep.stat("b_reconstruction")
        .add((bv.transpose() * pair.g1.value(p) * bv - pullback_value(pair.phi, pair.g2, p))
                 .cwiseAbs()
                 .maxCoeff());
    rep.stat("codazzi_b").add(codazzi_residual(pair.g1, b, p).norm());
    double Kg1 = gauss_curvature(pair.g1, p);
    double Kpb = gauss_curvature(pb, p);
    rep.stat("det_b_redundancy").add(Kpb - Kg1 / det2(bv));
  }
}

struct GBpair {
  MetricField g1;
  Tensor11Field b;
  MetricField G;
  Tensor11Field B;
  std::function<Mat2(const Vec2&)> b_point, B_point, G_point;
  double mask_threshold = 1e-12;
  bool analytic_jets = false;
};

/// G = (1/4) g1((1+b)., (1+b).) and B = (1+b)^{-1}(b-1). Jets are exact when
/// the pair carries a closed-form b, otherwise finite differences of the
/// pointwise algebra.
inline GBpair build_GB(const LagrangianPair& pair) {
  GBpair gb;
  gb.g1 = pair.g1;
  gb.b = b_field(pair);
  LagrangianPair copy = pair;
  gb.b_point = [copy](const Vec2& p) { return compute_b(copy, p); };
  gb.G_point = [copy](const Vec2& p) {
    Mat2 A = Mat2::Identity() + compute_b(copy, p);
    return Mat2(0.25 * A.transpose() * copy.g1.value(p) * A);
  };
  gb.B_point = [copy](const Vec2& p) {
    Mat2 bv = compute_b(copy, p);
    return Mat2(inv2(Mat2(Mat2::Identity() + bv)) * (bv - Mat2::Identity()));
  };
  if (pair.b_analytic) {
    gb.analytic_jets = true;
    Tensor11Field bf = *pair.b_analytic;
    MetricField g1 = pair.g1;
    gb.G.eval = [bf, g1](const Vec2& p) {
      Mat2J A = bf.at(p).a;
      A(0, 0) += 1.0;
      A(1, 1) += 1.0;
      Mat2J gJ = g1.at(p).jets();
      Mat2J low;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          Jet2 s(0.0);
          for (int a = 0; a < 2; ++a)
            for (int bb = 0; bb < 2; ++bb) s += A(a, i) * gJ(a, bb) * A(bb, j);
          low(i, j) = 0.25 * s;
        }
      return MetricJets{low(0, 0), low(0, 1), low(1, 1)};
    };
    gb.B.eval = [bf](const Vec2& p) {
      Mat2J bv = bf.at(p).a;
      Mat2J plus = bv, minus = bv;
      plus(0, 0) += 1.0;
      plus(1, 1) += 1.0;
      minus(0, 0) -= 1.0;
      minus(1, 1) -= 1.0;
      Tensor11Jets out;
      out.a = inv2(plus) * minus;
      return out;
    };
  } else {
    gb.G = MetricField::finite_difference(gb.G_point, pair.h_fd);
    gb.B = Tensor11Field::finite_difference(gb.B_point, pair.h_fd);
  }
  return gb;
}

/// GBpair assembled directly from closed-form (G, B) fields (conformal-chart
/// route used by the quadratic-differential layer).
inline GBpair gb_from_fields(const MetricField& G, const Tensor11Field& B) {
  GBpair gb;
  gb.G = G;
  gb.B = B;
  gb.G_point = [G](const Vec2& p) { return G.value(p); };
  gb.B_point = [B](const Vec2& p) { return B.value(p); };
  gb.analytic_jets = true;
  return gb;
}

struct Spectral {
  bool masked = false;
  double Lambda = 0.0;  // nonnegative eigenvalue of B
  double chi = 0.0;
  EigenPair2 frame;     // eigenvectors of B per the orientation convention
};

inline Spectral spectral(const GBpair& gb, const Vec2& p) {
  Mat2 B = gb.B_point(p);
  double mdet = -det2(B);
  Spectral s;
  if (mdet < gb.mask_threshold) {
    s.masked = true;
    return s;
  }
  s.Lambda = std::sqrt(mdet);
  s.chi = 0.25 * std::log(mdet);
  s.frame = eigen_real2(B);
  return s;
}

/// chi at a point, or NaN where masked.
inline double chi_value(const GBpair& gb, const Vec2& p) {
  Spectral s = spectral(gb, p);
  return s.masked ? std::numeric_limits<double>::quiet_NaN() : s.chi;
}

/// Divergence-form grid stencil for Delta^G chi at interior node (i,j):
/// conservative second differences with the metric coefficient at half-nodes.
/// Returns NaN when any stencil value is masked.
inline double laplace_stencil(const GBpair& gb, const ChartDomain& grid, int i, int j) {
  double hx = grid.hx(), hy = grid.hy();
  auto chi = [&](int a, int bq) { return chi_value(gb, grid.node(a, bq)); };
  Vec2 p = grid.node(i, j);
  Mat2 Gp = gb.G_point(p);
  bool conformal = std::abs(Gp(0, 0) - Gp(1, 1)) < 1e-10 && std::abs(Gp(0, 1)) < 1e-10;
  double c = chi(i, j), xp = chi(i + 1, j), xm = chi(i - 1, j), yp = chi(i, j + 1),
         ym = chi(i, j - 1);
  if (std::isnan(c) || std::isnan(xp) || std::isnan(xm) || std::isnan(yp) || std::isnan(ym))
    return std::numeric_limits<double>::quiet_NaN();
  if (conformal) {
    double flat = (xp - 2 * c + xm) / (hx * hx) + (yp - 2 * c + ym) / (hy * hy);
    return flat / Gp(0, 0);
  }
  auto coef = [&](const Vec2& q, int dir) {
    Mat2 G = gb.G_point(q);
    Mat2 Gi = inv2(G);
    return std::sqrt(det2(G)) * Gi(dir, dir);
  };
  double w = std::sqrt(det2(Gp));
  double ax_p = coef(Vec2(p(0) + hx / 2, p(1)), 0), ax_m = coef(Vec2(p(0) - hx / 2, p(1)), 0);
  double ay_p = coef(Vec2(p(0), p(1) + hy / 2), 1), ay_m = coef(Vec2(p(0), p(1) - hy / 2), 1);
  double div = (ax_p * (xp - c) - ax_m * (c - xm)) / (hx * hx) +
               (ay_p * (yp - c) - ay_m * (c - ym)) / (hy * hy);
  // off-diagonal G^{12} terms vanish for the diagonal metrics used here; for
  // generality add the mixed-difference contribution when present.
  Mat2 Gi = inv2(Gp);
  if (std::abs(Gi(0, 1)) > 1e-14) {
    double pp = chi(i + 1, j + 1), pm = chi(i + 1, j - 1), mp = chi(i - 1, j + 1),
           mm = chi(i - 1, j - 1);
    if (std::isnan(pp) || std::isnan(pm) || std::isnan(mp) || std::isnan(mm))
      return std::numeric_limits<double>::quiet_NaN();
    div += 2.0 * w * Gi(0, 1) * (pp - pm - mp + mm) / (4.0 * hx * hy);
  }
  return div / w;
}

/// The four identity families of the (G, B) pair plus the positivity margin:
/// gauss_identity |K_G - (1 + det B)|, trace_identity |tr B|,
/// laplacian_identity |Delta^G chi - K_G| (grid stencil), codazzi_B, and
/// kg_violation = max(0, -K_G). Also records the 4/(2+tr b) form of K_G.
inline void identity_residuals(const GBpair& gb, const ChartDomain& grid, ResidualReport& rep) {
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      Vec2 p = grid.node(i, j);
      double KG = gauss_curvature(gb.G, p);
      Mat2 Bv = gb.B_point(p);
      rep.stat("gauss_identity").add(KG - (1.0 + det2(Bv)));
      rep.stat("trace_identity").add(tr2(Bv));
      if (gb.b_point) {
        Mat2 bv = gb.b_point(p);
        rep.stat("gauss_identity_trb").add(KG - 4.0 / (2.0 + tr2(bv)));
      }
      rep.stat("codazzi_B").add(codazzi_residual(gb.G, gb.B, p).norm());
      rep.stat("kg_violation").add(KG > 0.0 ? 0.0 : -KG);
      Spectral s = spectral(gb, p);
      if (s.masked)
        rep.stat("chi_negativity").add_masked();
      else
        rep.stat("chi_negativity").add(s.chi < 0.0 ? 0.0 : s.chi);
      if (grid.interior(i, j)) {
        double lap = laplace_stencil(gb, grid, i, j);
        if (std::isnan(lap))
          rep.stat("laplacian_identity").add_masked();
        else
          rep.stat("laplacian_identity").add(lap - KG);
      }
    }
}

/// Swap symmetry: the swapped pair (g2, g1, phi^{-1}) produces
/// (G', B') with phi^*G' = G and B' = -phi_* B.
inline void inverse_symmetry_check(const LagrangianPair& pair, const ChartDomain& grid,
                                   ResidualReport& rep) {
  LagrangianPair swapped;
  swapped.g1 = pair.g2;
  swapped.g2 = pair.g1;
  swapped.phi = inverse_map(pair.phi);
  swapped.h_fd = pair.h_fd;
  GBpair gb = build_GB(pair);
  GBpair gbp = build_GB(swapped);
  for (const Vec2& p : grid.nodes()) {
    Map2Jets f = pair.phi.at(p);
    Mat2 J = f.jacobian();
    Vec2 q = f.value();
    Mat2 pullG = J.transpose() * gbp.G_point(q) * J;
    rep.stat("inverse_G").add((pullG - gb.G_point(p)).cwiseAbs().maxCoeff());
    Mat2 pushB = J * gb.B_point(p) * inv2(J);
    rep.stat("inverse_B").add((gbp.B_point(q) + pushB).cwiseAbs().maxCoeff());
  }
}

struct ProbeReport {
  double interior_max = 0.0, boundary_max = 0.0;
  // per-epsilon (interior max, boundary max) of chi_eps = chi + eps * t
  std::vector<std::array<double, 3>> epsilon_rows;  // {eps, interior, boundary}
  long unmasked = 0, total = 0;
  long laplacian_positive = 0, laplacian_nonpositive = 0;
  bool inconclusive = false;

  double gap() const { return interior_max - boundary_max; }
};

/// Maximum-principle probe of a chi evaluator on an annulus grid (first
/// coordinate t = log |z|). NaN marks masked points.
inline ProbeReport max_principle_probe(const std::function<double(const Vec2&)>& chi,
                                       const std::function<double(int, int)>& laplacian,
                                       const ChartDomain& grid,
                                       const std::vector<double>& epsilons) {
  ProbeReport pr;
  double lo = std::numeric_limits<double>::lowest();
  pr.interior_max = pr.boundary_max = lo;
  std::vector<double> in_eps(epsilons.size(), lo), bd_eps(epsilons.size(), lo);
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      Vec2 p = grid.node(i, j);
      double v = chi(p);
      ++pr.total;
      if (std::isnan(v)) continue;
      ++pr.unmasked;
      bool interior = grid.interior(i, j);
      (interior ? pr.interior_max : pr.boundary_max) =
          std::max(interior ? pr.interior_max : pr.boundary_max, v);
      for (size_t k = 0; k < epsilons.size(); ++k) {
        double ve = v + epsilons[k] * p(0);
        (interior ? in_eps[k] : bd_eps[k]) = std::max(interior ? in_eps[k] : bd_eps[k], ve);
      }
      if (interior && laplacian) {
        double lap = laplacian(i, j);
        if (!std::isnan(lap)) (lap > 0.0 ? pr.laplacian_positive : pr.laplacian_nonpositive)++;
      }
    }
  for (size_t k = 0; k < epsilons.size(); ++k)
    pr.epsilon_rows.push_back({epsilons[k], in_eps[k], bd_eps[k]});
  if (pr.unmasked < (9 * pr.total) / 10) pr.inconclusive = true;
  return pr;
}

}  // namespace conegeo
