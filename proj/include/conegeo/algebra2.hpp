#pragma once

#include <array>
#include <stdexcept>

#include "conegeo/jet.hpp"

namespace conegeo {

using Mat2J = Eigen::Matrix<Jet2, 2, 2>;
using Vec2J = Eigen::Matrix<Jet2, 2, 1>;

// Closed-form 2x2 routines, templated on scalar so they run on double and
// Jet2 alike. No general solver anywhere in the core.

template <typename M>
auto det2(const M& a) {
  return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
}

template <typename M>
auto tr2(const M& a) {
  return a(0, 0) + a(1, 1);
}

template <typename M>
M inv2(const M& a) {
  auto d = det2(a);
  M r;
  r(0, 0) = a(1, 1) / d;
  r(0, 1) = -a(0, 1) / d;
  r(1, 0) = -a(1, 0) / d;
  r(1, 1) = a(0, 0) / d;
  return r;
}

/// Principal square root of a 2x2 matrix with positive eigenvalues:
/// sqrt(M) = (M + sqrt(det M) I) / sqrt(tr M + 2 sqrt(det M)).
/// Being a polynomial in M, it preserves self-adjointness with respect to
/// any metric that M is self-adjoint for.
template <typename M>
M sqrt_psd2(const M& a) {
  using std::sqrt;
  auto sd = sqrt(det2(a));
  auto denom = sqrt(tr2(a) + 2.0 * sd);
  M r = a;
  r(0, 0) = (a(0, 0) + sd) / denom;
  r(1, 1) = (a(1, 1) + sd) / denom;
  r(0, 1) = a(0, 1) / denom;
  r(1, 0) = a(1, 0) / denom;
  return r;
}

struct EigenPair2 {
  double lambda1, lambda2;   // lambda1 >= lambda2
  Vec2 v1, v2;               // unit eigenvectors
};

/// Eigen decomposition of a real 2x2 matrix with real spectrum (as arises for
/// tensors self-adjoint with respect to a metric). Eigenvectors follow the
/// orientation convention: first component nonnegative, ties broken toward
/// positive second component.
inline EigenPair2 eigen_real2(const Mat2& a, double tol = 1e-13) {
  double tr = a(0, 0) + a(1, 1);
  double det = det2(a);
  double disc = tr * tr / 4.0 - det;
  if (disc < 0.0) {
    if (disc < -tol) throw std::domain_error("eigen_real2: complex spectrum");
    disc = 0.0;
  }
  double s = std::sqrt(disc);
  EigenPair2 r;
  r.lambda1 = tr / 2.0 + s;
  r.lambda2 = tr / 2.0 - s;
  auto vec_for = [&](double lam) -> Vec2 {
    Vec2 c0(a(0, 0) - lam, a(1, 0));
    Vec2 c1(a(0, 1), a(1, 1) - lam);
    // eigenvector is orthogonal complement of the larger row of (A - lam I)
    Vec2 r0(a(0, 0) - lam, a(0, 1));
    Vec2 r1(a(1, 0), a(1, 1) - lam);
    Vec2 row = r0.norm() >= r1.norm() ? r0 : r1;
    Vec2 v;
    if (row.norm() < tol)
      v = Vec2(1, 0);
    else
      v = Vec2(-row(1), row(0)).normalized();
    if (v(0) < 0 || (v(0) == 0 && v(1) < 0)) v = -v;
    return v;
  };
  r.v1 = vec_for(r.lambda1);
  r.v2 = vec_for(r.lambda2);
  (void)vec_for;
  return r;
}

/// Extremal generalized eigenvalues of the pencil det(A - lambda B) = 0 for
/// B positive definite.
inline std::array<double, 2> generalized_eigs2(const Mat2& a, const Mat2& b) {
  // det(A - lam B) = det(B) lam^2 - (a00 b11 + a11 b00 - a01 b10 - a10 b01) lam + det(A)
  double p2 = det2(b);
  double p1 = a(0, 0) * b(1, 1) + a(1, 1) * b(0, 0) - a(0, 1) * b(1, 0) - a(1, 0) * b(0, 1);
  double p0 = det2(a);
  double disc = p1 * p1 - 4.0 * p2 * p0;
  disc = disc < 0.0 ? 0.0 : std::sqrt(disc);
  double l1 = (p1 + disc) / (2.0 * p2);
  double l2 = (p1 - disc) / (2.0 * p2);
  return {l2, l1};  // {min, max}
}

}  // namespace conegeo
