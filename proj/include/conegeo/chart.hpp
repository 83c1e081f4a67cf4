#pragma once

#include <random>
#include <stdexcept>
#include <vector>

#include "conegeo/jet.hpp"

namespace conegeo {

/// A rectangular coordinate patch. For log-polar charts the coordinates are
/// (t, theta) with z = e^{t + i theta}, t_max <= 0, so the puncture t -> -inf
/// is always excluded.
struct ChartDomain {
  enum class Kind { Rectangle, LogPolar };

  Kind kind = Kind::Rectangle;
  double x_min = 0, x_max = 1;   // t range for log-polar
  double y_min = 0, y_max = 1;   // theta range for log-polar
  int nx = 33, ny = 33;

  static ChartDomain rectangle(double x0, double x1, double y0, double y1, int nx, int ny) {
    ChartDomain d{Kind::Rectangle, x0, x1, y0, y1, nx, ny};
    d.validate();
    return d;
  }

  static ChartDomain log_polar(double t_min, double t_max, double theta_max, int nt, int ntheta) {
    ChartDomain d{Kind::LogPolar, t_min, t_max, 0.0, theta_max, nt, ntheta};
    d.validate();
    return d;
  }

  void validate() const {
    if (!(x_min < x_max) || !(y_min < y_max)) throw std::invalid_argument("ChartDomain: empty bounds");
    if (nx < 2 || ny < 2) throw std::invalid_argument("ChartDomain: grid resolution must be >= 2");
    if (kind == Kind::LogPolar && x_max > 0.0)
      throw std::invalid_argument("ChartDomain: log-polar requires t_max <= 0");
  }

  double hx() const { return (x_max - x_min) / (nx - 1); }
  double hy() const { return (y_max - y_min) / (ny - 1); }

  Vec2 node(int i, int j) const { return {x_min + i * hx(), y_min + j * hy()}; }

  bool interior(int i, int j, int ring = 1) const {
    return i >= ring && i < nx - ring && j >= ring && j < ny - ring;
  }

  std::vector<Vec2> nodes() const {
    std::vector<Vec2> pts;
    pts.reserve(static_cast<size_t>(nx) * ny);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) pts.push_back(node(i, j));
    return pts;
  }

  std::vector<Vec2> random_points(int n, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(x_min, x_max), uy(y_min, y_max);
    std::vector<Vec2> pts;
    pts.reserve(n);
    for (int k = 0; k < n; ++k) {
      double a = ux(rng), b = uy(rng);
      pts.emplace_back(a, b);
    }
    return pts;
  }

  ChartDomain with_resolution(int mx, int my) const {
    ChartDomain d = *this;
    d.nx = mx;
    d.ny = my;
    return d;
  }
};

}  // namespace conegeo
