#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "conegeo/calculus.hpp"
#include "conegeo/chart.hpp"
#include "conegeo/cone.hpp"
#include "conegeo/report.hpp"

namespace conegeo {

using Mat32 = Eigen::Matrix<double, 3, 2>;

/// A curvature-1 chart together with its isometric map to the unit sphere.
struct SpherePatch {
  double alpha = 1.0;
  MetricField g;
  Map3 dev;
  ChartDomain domain;

  static SpherePatch cone(double alpha, const ChartDomain& dom) {
    return {alpha, spherical_cone_metric_logpolar(alpha), developing_map(alpha), dom};
  }

  /// Stereographic chart of the round sphere from the south pole; the origin
  /// maps to (0,0,1).
  static SpherePatch round_stereo(const ChartDomain& dom) {
    Map3 dev = Map3::analytic([](const Jet2& x, const Jet2& y) {
      Jet2 d = 1.0 + x * x + y * y;
      return std::array<Jet2, 3>{2.0 * x / d, 2.0 * y / d, (2.0 - d) / d};
    });
    return {1.0, round_metric(), dev, dom};
  }

  /// Spot check that the chart metric has curvature one.
  void require_unit_curvature(double tol = 1e-6) const {
    for (const Vec2& p : domain.random_points(7, 1234)) {
      double K = gauss_curvature_from_jets(g.at(p));
      if (std::abs(K - 1.0) > tol) {
        std::ostringstream os;
        os << "SpherePatch: curvature " << K << " != 1 at (" << p(0) << ", " << p(1) << ")";
        throw std::domain_error(os.str());
      }
    }
  }
};

/// b(u) = nabla grad u + u * 1, evaluated pointwise from second-order jets.
inline Mat2 codazzi_tensor_value(const ScalarField& u, const MetricField& g, const Vec2& p) {
  Jet2 ju = u.at(p);
  return hess11(g.at(p), ju) + ju.v * Mat2::Identity();
}

inline Tensor11Field codazzi_from_potential(const ScalarField& u, const SpherePatch& patch,
                                            double h = 1e-4) {
  patch.require_unit_curvature();
  ScalarField uc = u;
  MetricField gc = patch.g;
  return Tensor11Field::finite_difference(
      [uc, gc](const Vec2& p) { return codazzi_tensor_value(uc, gc, p); }, h);
}

/// Potential with its admissibility check: b(u) must stay positive definite.
struct Potential {
  ScalarField u;

  bool positive_definite(const SpherePatch& patch, const ChartDomain& grid) const {
    for (const Vec2& p : grid.nodes()) {
      Mat2 b = codazzi_tensor_value(u, patch.g, p);
      if (!(tr2(b) > 0.0 && det2(b) > 0.0)) return false;
    }
    return true;
  }
};

struct PotentialRecovery {
  Eigen::VectorXd u;  // grid values, row-major in (i, j)
  double residual = 0.0;
};

namespace detail {

// fourth-order centered stencils
inline const std::array<std::pair<int, double>, 5>& d1_stencil() {
  static const std::array<std::pair<int, double>, 5> s = {
      {{-2, 1.0 / 12.0}, {-1, -8.0 / 12.0}, {0, 0.0}, {1, 8.0 / 12.0}, {2, -1.0 / 12.0}}};
  return s;
}
inline const std::array<std::pair<int, double>, 5>& d2_stencil() {
  static const std::array<std::pair<int, double>, 5> s = {
      {{-2, -1.0 / 12.0}, {-1, 16.0 / 12.0}, {0, -30.0 / 12.0}, {1, 16.0 / 12.0},
       {2, -1.0 / 12.0}}};
  return s;
}

}  // namespace detail

/// Least-squares solve of Hess u + u g = g(A., .) on the grid.  The continuous
/// problem has a three-dimensional kernel spanned by the linear coordinate
/// functions of dev; the returned solution is orthogonal to that span.
inline PotentialRecovery recover_potential(const Tensor11Field& A, const SpherePatch& patch,
                                           const ChartDomain& grid) {
  const int nx = grid.nx, ny = grid.ny;
  const int n = nx * ny;
  const double hx = grid.hx(), hy = grid.hy();
  auto idx = [ny](int i, int j) { return i * ny + j; };

  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> rhs;
  long row = 0;

  auto push = [&](int i, int j, double w) {
    if (w != 0.0) trips.emplace_back(row, idx(i, j), w);
  };

  for (int i = 2; i < nx - 2; ++i)
    for (int j = 2; j < ny - 2; ++j) {
      Vec2 p = grid.node(i, j);
      MetricJets gj = patch.g.at(p);
      Mat2 gv = gj.value();
      Christoffel ch = christoffel_from_jets(gj);
      Mat2 gA = gv * A.value(p);
      gA = 0.5 * (gA + gA.transpose());  // lower the index; symmetrize roundoff

      static const int comp[3][2] = {{0, 0}, {0, 1}, {1, 1}};
      for (const auto& kl : comp) {
        int k = kl[0], l = kl[1];
        // second-derivative part
        if (k == 0 && l == 0)
          for (const auto& [o, w] : detail::d2_stencil()) push(i + o, j, w / (hx * hx));
        else if (k == 1 && l == 1)
          for (const auto& [o, w] : detail::d2_stencil()) push(i, j + o, w / (hy * hy));
        else
          for (const auto& [ox, wx] : detail::d1_stencil())
            for (const auto& [oy, wy] : detail::d1_stencil())
              push(i + ox, j + oy, wx * wy / (hx * hy));
        // Christoffel correction - Gamma^m_kl u_m and the zeroth-order term
        for (int m = 0; m < 2; ++m) {
          double c = -ch.G[m][k][l] / (m == 0 ? hx : hy);
          for (const auto& [o, w] : detail::d1_stencil())
            push(i + (m == 0 ? o : 0), j + (m == 1 ? o : 0), c * w);
        }
        push(i, j, gv(k, l));
        rhs.push_back(gA(k, l));
        ++row;
      }
    }
  const long eq_rows = row;
  if (eq_rows < n)
    throw std::runtime_error("recover_potential: grid too coarse for the stencil width");

  // discretized kernel: u = <e_m, dev>; orthonormalized over the grid
  std::vector<Eigen::VectorXd> kernel;
  for (int m = 0; m < 3; ++m) {
    Eigen::VectorXd k(n);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) k(idx(i, j)) = patch.dev.value(grid.node(i, j))(m);
    for (const auto& prev : kernel) k -= prev.dot(k) * prev;
    double nrm = k.norm();
    if (nrm < 1e-8)
      throw std::runtime_error("recover_potential: degenerate kernel basis on this patch");
    kernel.push_back(k / nrm);
  }
  // Gauge rows keep the normal equations nonsingular across the kernel.  The
  // discrete operator only annihilates the sampled kernel up to truncation
  // error tau, so the gauge fights the equations at that level; weight it just
  // above tau so the pinning wins inside the kernel without perturbing the
  // rest.  Restricting the rows to a coarse subsample keeps the normal matrix
  // sparse (full kernel rows would add a dense rank-3 block).
  Eigen::SparseMatrix<double> Meq(eq_rows, n);
  Meq.setFromTriplets(trips.begin(), trips.end());
  double tau2 = 0.0;
  for (const auto& k : kernel) tau2 = std::max(tau2, (Meq * k).squaredNorm());
  double gauge = std::sqrt(std::max(1e4 * tau2, 1e-12));
  int stride_x = std::max(1, (nx - 4) / 6), stride_y = std::max(1, (ny - 4) / 6);
  for (const auto& k : kernel) {
    for (int i = 2; i < nx - 2; i += stride_x)
      for (int j = 2; j < ny - 2; j += stride_y) trips.emplace_back(row, idx(i, j), gauge * k(idx(i, j)));
    rhs.push_back(0.0);
    ++row;
  }

  Eigen::SparseMatrix<double> M(row, n);
  M.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd b = Eigen::Map<Eigen::VectorXd>(rhs.data(), row);

  Eigen::SparseMatrix<double> N = Eigen::SparseMatrix<double>(M.transpose()) * M;
  for (int c = 0; c < n; ++c) N.coeffRef(c, c) += 1e-10;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(N);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("recover_potential: normal equations rank-deficient beyond the kernel");
  Eigen::VectorXd u = solver.solve(Eigen::VectorXd(M.transpose() * b));

  PotentialRecovery out;
  for (const auto& k : kernel) u -= k.dot(u) * k;
  out.u = u;
  // The misfit is a property of the equivalence class u + kernel, so minimize
  // it over the three kernel coefficients before reporting.
  Eigen::VectorXd r0 = Meq * u - b.head(eq_rows);
  Eigen::MatrixXd T(eq_rows, 3);
  for (int m = 0; m < 3; ++m) T.col(m) = Meq * kernel[m];
  Eigen::Vector3d c = T.colPivHouseholderQr().solve(-r0);
  double scale = b.head(eq_rows).norm();
  out.residual = (r0 + T * c).norm() / (scale > 1e-300 ? scale : 1.0);
  return out;
}

/// Immersion of a chart into 3-space with exact first-order jets; the unit
/// normal comes from the cross product of the coordinate derivatives.
struct Immersion3 {
  std::function<Vec3(const Vec2&)> value;
  std::function<Mat32(const Vec2&)> jacobian;
  double h_fd = 2e-4;     // metric-level differences: balanced against roundoff in 2nd derivatives
  double h_normal = 5e-5; // first derivative of the unit normal only

  Vec3 normal(const Vec2& p) const {
    Mat32 J = jacobian(p);
    Vec3 nrm = J.col(0).cross(J.col(1));
    double len = nrm.norm();
    if (!(len > 1e-14 * std::max(1.0, J.col(0).norm() * J.col(1).norm()))) {
      std::ostringstream os;
      os << "Immersion3: rank drop at (" << p(0) << ", " << p(1) << ")";
      throw std::domain_error(os.str());
    }
    return nrm / len;
  }

  Mat2 first_form(const Vec2& p) const {
    Mat32 J = jacobian(p);
    return J.transpose() * J;
  }

  Mat2 second_form(const Vec2& p) const {
    Mat32 J = jacobian(p);
    Mat2 II;
    for (int i = 0; i < 2; ++i) {
      Vec2 e = Vec2::Zero();
      e(i) = h_normal;
      Vec3 dN = (normal(p + e) - normal(p - e)) / (2.0 * h_normal);
      // sign convention S = (d sigma)^{-1} d nu: the unit sphere has S = +1
      for (int j = 0; j < 2; ++j) II(i, j) = dN.dot(J.col(j));
    }
    return 0.5 * (II + II.transpose());
  }

  Mat2 shape(const Vec2& p) const { return inv2(first_form(p)) * second_form(p); }

  MetricField first_form_field() const {
    auto self = *this;
    return MetricField::finite_difference([self](const Vec2& p) { return self.first_form(p); },
                                          h_fd);
  }
};

namespace detail {

struct SigmaJets {
  Vec3 value = Vec3::Zero();
  Mat32 J = Mat32::Zero();
};

/// sigma = dev_*(grad u) + u dev, differentiated once by Leibniz from the
/// second-order jets of u, g and dev.
inline SigmaJets sigma_jets(const ScalarField& u, const SpherePatch& patch, const Vec2& p) {
  Jet2 ju = u.at(p);
  MetricJets gj = patch.g.at(p);
  Map3Jets dj = patch.dev.at(p);

  Mat2 gv = gj.value();
  Mat2 gi = inv2(gv);
  // w = grad u and its first derivatives
  Vec2 w = gi * ju.g;
  Mat2 dw;  // dw(i,k) = d_k w^i
  for (int k = 0; k < 2; ++k) {
    Mat2 dg;
    dg << gj.g11.g(k), gj.g12.g(k), gj.g12.g(k), gj.g22.g(k);
    Vec2 col = -gi * dg * gi * ju.g + gi * ju.h.col(k);
    dw.col(k) = col;
  }

  SigmaJets out;
  for (int m = 0; m < 3; ++m) {
    const Jet2& c = dj.c[m];
    out.value(m) = w(0) * c.g(0) + w(1) * c.g(1) + ju.v * c.v;
    for (int k = 0; k < 2; ++k)
      out.J(m, k) = dw(0, k) * c.g(0) + dw(1, k) * c.g(1) + w(0) * c.h(0, k) +
                    w(1) * c.h(1, k) + ju.g(k) * c.v + ju.v * c.g(k);
  }
  return out;
}

}  // namespace detail

inline Immersion3 build_sigma(const ScalarField& u, const SpherePatch& patch) {
  Immersion3 im;
  ScalarField uc = u;
  SpherePatch pc = patch;
  im.value = [uc, pc](const Vec2& p) { return detail::sigma_jets(uc, pc, p).value; };
  im.jacobian = [uc, pc](const Vec2& p) { return detail::sigma_jets(uc, pc, p).J; };
  return im;
}

inline Immersion3 build_varsigma(const ScalarField& u, const SpherePatch& patch) {
  Immersion3 im;
  ScalarField uc = u;
  SpherePatch pc = patch;
  im.value = [uc, pc](const Vec2& p) {
    return Vec3(0.5 * (detail::sigma_jets(uc, pc, p).value + pc.dev.value(p)));
  };
  im.jacobian = [uc, pc](const Vec2& p) {
    Mat32 J = detail::sigma_jets(uc, pc, p).J;
    return Mat32(0.5 * (J + pc.dev.at(p).jacobian()));
  };
  return im;
}

/// Residual families tying sigma and varsigma back to the chart data:
/// normal_is_dev, pushforward_b, first_form_sigma, shape_sigma,
/// first_form_varsigma, varsigma_midpoint.
inline void immersion_identity_checks(const Immersion3& sigma, const Immersion3& varsigma,
                                      const ScalarField& u, const SpherePatch& patch,
                                      const ChartDomain& grid, ResidualReport& rep) {
  Stat normal_dev, push_b, form_sigma, shape_sigma, form_varsigma, midpoint;
  for (const Vec2& p : grid.nodes()) {
    Map3Jets dj = patch.dev.at(p);
    Mat2 gv = patch.g.value(p);
    Mat2 b = codazzi_tensor_value(u, patch.g, p);

    normal_dev.add((sigma.normal(p) - dj.value()).norm());
    push_b.add((sigma.jacobian(p) - dj.jacobian() * b).cwiseAbs().maxCoeff());
    form_sigma.add((sigma.first_form(p) - b.transpose() * gv * b).cwiseAbs().maxCoeff());
    shape_sigma.add((sigma.shape(p) - inv2(b)).cwiseAbs().maxCoeff());
    Mat2 one_b = Mat2::Identity() + b;
    form_varsigma.add(
        (varsigma.first_form(p) - 0.25 * one_b.transpose() * gv * one_b).cwiseAbs().maxCoeff());
    midpoint.add(
        (varsigma.value(p) - 0.5 * (sigma.value(p) + dj.value())).norm());
  }
  rep.residuals["normal_is_dev"] = normal_dev;
  rep.residuals["pushforward_b"] = push_b;
  rep.residuals["first_form_sigma"] = form_sigma;
  rep.residuals["shape_sigma"] = shape_sigma;
  rep.residuals["first_form_varsigma"] = form_varsigma;
  rep.residuals["varsigma_midpoint"] = midpoint;
}

struct ProjectionResult {
  MetricField H;   // pullback of the planar flat metric under pi o varsigma
  double C = 1.0;  // bi-Lipschitz constant: 1/C H <= G <= C H on the grid
};

/// Vertical projection pi(x,y,z) = (x,y) applied to varsigma.  Requires the
/// patch to stay in the upper cap <dev, e3> >= eps0.
inline ProjectionResult projection_metric(const Immersion3& varsigma, const MetricField& G,
                                          const SpherePatch& patch, const ChartDomain& grid,
                                          double eps0 = 0.05) {
  for (const Vec2& p : grid.nodes()) {
    double height = patch.dev.value(p)(2);
    if (height < eps0) {
      std::ostringstream os;
      os << "projection_metric: <dev, e3> = " << height << " < " << eps0 << " at (" << p(0)
         << ", " << p(1) << "); shrink the domain (smaller t_max)";
      throw std::domain_error(os.str());
    }
  }

  Immersion3 vc = varsigma;
  auto H_value = [vc](const Vec2& p) {
    Eigen::Matrix2d P = vc.jacobian(p).topRows<2>();
    return Mat2(P.transpose() * P);
  };

  ProjectionResult out;
  double C = 1.0;
  for (const Vec2& p : grid.nodes()) {
    auto [lo, hi] = generalized_eigs2(G.value(p), H_value(p));
    if (!(lo > 0.0))
      throw std::domain_error("projection_metric: projected metric degenerate on the grid");
    C = std::max({C, hi, 1.0 / lo});
  }
  // certify the sandwich pointwise with the reported constant
  for (const Vec2& p : grid.nodes()) {
    auto [lo, hi] = generalized_eigs2(G.value(p), H_value(p));
    if (lo * C < 1.0 - 1e-12 || hi > C + 1e-12)
      throw std::logic_error("projection_metric: sandwich certificate failed");
  }
  out.H = MetricField::finite_difference(H_value, varsigma.h_fd);
  out.C = C;
  return out;
}

struct PunctureReport {
  Vec3 limit = Vec3::Zero();
  double axis_distance = 0.0;
  double deck_spread = 0.0;
  std::vector<double> distances;  // max over theta of |varsigma - limit|, per t
  bool monotone = true;
  bool inconclusive = false;
};

/// Tracks varsigma along t -> -infty over three decks of the cover and fits
/// the limit point, which must sit on the rotation axis.
inline PunctureReport puncture_limit_check(const Immersion3& varsigma, double alpha,
                                           const std::vector<double>& ts, int ntheta = 12) {
  if (ts.size() < 3) throw std::invalid_argument("puncture_limit_check: need at least 3 samples");
  std::vector<double> base;  // angles within one deck
  for (int k = 0; k < ntheta; ++k) base.push_back(2.0 * M_PI * k / ntheta);
  std::vector<double> thetas;  // three decks of the cover
  for (int d = 0; d < 3; ++d)
    for (double th : base) thetas.push_back(th + 2.0 * M_PI * d);

  PunctureReport out;
  double tmin = *std::min_element(ts.begin(), ts.end());
  // per-deck fitted limits at the deepest sample
  std::array<Vec3, 3> deck_mean;
  for (int d = 0; d < 3; ++d) {
    Vec3 m = Vec3::Zero();
    for (double th : base) m += varsigma.value(Vec2(tmin, th + 2.0 * M_PI * d));
    deck_mean[d] = m / static_cast<double>(base.size());
  }
  Vec3 mean = (deck_mean[0] + deck_mean[1] + deck_mean[2]) / 3.0;
  double spread = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int bq = a + 1; bq < 3; ++bq)
      spread = std::max(spread, (deck_mean[a] - deck_mean[bq]).norm());
  out.limit = mean;
  out.deck_spread = spread;
  out.axis_distance = std::hypot(mean(0), mean(1));

  std::vector<double> sorted = ts;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());  // toward the puncture
  for (double t : sorted) {
    double d = 0.0;
    for (double th : thetas) d = std::max(d, (varsigma.value(Vec2(t, th)) - mean).norm());
    out.distances.push_back(d);
  }
  for (std::size_t k = 1; k < out.distances.size(); ++k)
    if (out.distances[k] > out.distances[k - 1] + 1e-14) out.monotone = false;
  out.inconclusive = !out.monotone;
  (void)alpha;
  return out;
}

/// Max deviation of the immersion from equivariance under one deck turn.
inline double immersion_equivariance_residual(const Immersion3& im, double alpha,
                                              const ChartDomain& grid) {
  double worst = 0.0;
  for (const Vec2& p : grid.nodes()) {
    Vec3 shifted = im.value(Vec2(p(0), p(1) + 2.0 * M_PI));
    worst = std::max(worst, (shifted - rotate_z(2.0 * M_PI * alpha, im.value(p))).norm());
  }
  return worst;
}

}  // namespace conegeo
