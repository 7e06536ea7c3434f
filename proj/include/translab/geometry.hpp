#ifndef TRANSLAB_GEOMETRY_HPP
#define TRANSLAB_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "translab/error.hpp"

namespace translab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

using Point = Vec2;

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Axis-aligned rectangle [lo.x, hi.x] x [lo.y, hi.y].
class Domain {
 public:
  Domain(Point lo, Point hi) : lo_(lo), hi_(hi) {
    if (!(lo.x < hi.x) || !(lo.y < hi.y))
      throw ParameterError("Domain: corners must satisfy x_lo < x_hi and y_lo < y_hi");
  }

  static Domain unit_square() { return Domain({0.0, 0.0}, {1.0, 1.0}); }

  Point lo() const { return lo_; }
  Point hi() const { return hi_; }
  double width() const { return hi_.x - lo_.x; }
  double height() const { return hi_.y - lo_.y; }
  double area() const { return width() * height(); }
  double perimeter() const { return 2.0 * (width() + height()); }

  /// Closed-set membership.
  bool contains(Point p) const {
    return p.x >= lo_.x && p.x <= hi_.x && p.y >= lo_.y && p.y <= hi_.y;
  }
  bool interior(Point p) const {
    return p.x > lo_.x && p.x < hi_.x && p.y > lo_.y && p.y < hi_.y;
  }
  bool on_boundary(Point p) const { return contains(p) && !interior(p); }

  /// Closest point of the closed rectangle.
  Point clamp(Point p) const {
    return {std::clamp(p.x, lo_.x, hi_.x), std::clamp(p.y, lo_.y, hi_.y)};
  }

  /// Rectangle strictly inside `this` (every point at distance >= margin from the boundary).
  bool contains_with_margin(const Domain& inner, double margin) const {
    return inner.lo_.x - lo_.x >= margin && hi_.x - inner.hi_.x >= margin &&
           inner.lo_.y - lo_.y >= margin && hi_.y - inner.hi_.y >= margin;
  }

  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  Point lo_;
  Point hi_;
};

/// Euclidean distance from x to the boundary of d. Never negative; exterior
/// points report their distance to the rectangle (use Domain::contains to tell
/// the sides apart).
inline double dist_to_boundary(const Domain& d, Point x) {
  if (d.contains(x)) {
    return std::min({x.x - d.lo().x, d.hi().x - x.x, x.y - d.lo().y, d.hi().y - x.y});
  }
  const double dx = std::max({d.lo().x - x.x, 0.0, x.x - d.hi().x});
  const double dy = std::max({d.lo().y - x.y, 0.0, x.y - d.hi().y});
  return std::hypot(dx, dy);
}

/// Omega_eps = {x in Omega : dist(x, boundary) > eps}, closed up for a rectangle.
inline Domain shrink(const Domain& d, double eps) {
  if (!(eps >= 0.0)) throw ParameterError("shrink: eps must be non-negative");
  if (2.0 * eps >= std::min(d.width(), d.height()))
    throw DomainError("shrink: eps = " + std::to_string(eps) + " leaves an empty interior");
  return Domain({d.lo().x + eps, d.lo().y + eps}, {d.hi().x - eps, d.hi().y - eps});
}

/// |Omega \ Omega_{1/h}|, the area of the boundary frame of width 1/h.
inline double boundary_layer_measure(const Domain& d, double h) {
  if (!(h > 0.0)) throw ParameterError("boundary_layer_measure: h must be positive");
  const double w = 1.0 / h;
  if (2.0 * w >= std::min(d.width(), d.height())) return d.area();
  return d.area() - (d.width() - 2.0 * w) * (d.height() - 2.0 * w);
}

/// Uniform node grid over a Domain: (nx + 1) x (ny + 1) nodes, row-major in x.
class Grid {
 public:
  Grid(Domain domain, std::size_t nx, std::size_t ny)
      : domain_(domain), nx_(nx), ny_(ny) {
    if (nx < 1 || ny < 1) throw ParameterError("Grid: nx and ny must be at least 1");
    hx_ = domain.width() / static_cast<double>(nx);
    hy_ = domain.height() / static_cast<double>(ny);
  }

  const Domain& domain() const { return domain_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double min_spacing() const { return std::min(hx_, hy_); }
  std::size_t num_nodes() const { return (nx_ + 1) * (ny_ + 1); }

  std::size_t index(std::size_t i, std::size_t j) const { return j * (nx_ + 1) + i; }

  double x(std::size_t i) const {
    return i == nx_ ? domain_.hi().x : domain_.lo().x + static_cast<double>(i) * hx_;
  }
  double y(std::size_t j) const {
    return j == ny_ ? domain_.hi().y : domain_.lo().y + static_cast<double>(j) * hy_;
  }
  Point node(std::size_t i, std::size_t j) const { return {x(i), y(j)}; }
  Point node(std::size_t k) const { return node(k % (nx_ + 1), k / (nx_ + 1)); }

  /// Cell containing p (clamped to the grid) and the local coordinates in [0, 1].
  struct Cell {
    std::size_t i, j;
    double fx, fy;
  };
  Cell locate(Point p) const {
    const double sx = (p.x - domain_.lo().x) / hx_;
    const double sy = (p.y - domain_.lo().y) / hy_;
    const auto ci = static_cast<std::size_t>(std::clamp(std::floor(sx), 0.0, double(nx_ - 1)));
    const auto cj = static_cast<std::size_t>(std::clamp(std::floor(sy), 0.0, double(ny_ - 1)));
    return {ci, cj, std::clamp(sx - double(ci), 0.0, 1.0), std::clamp(sy - double(cj), 0.0, 1.0)};
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Domain domain_;
  std::size_t nx_;
  std::size_t ny_;
  double hx_ = 0.0;
  double hy_ = 0.0;
};

/// Uniform partition 0 = t_0 < ... < t_nt = T.
class TimePartition {
 public:
  TimePartition(double T, std::size_t nt) : T_(T), nt_(nt) {
    if (!(T > 0.0)) throw ParameterError("TimePartition: T must be positive");
    if (nt < 1) throw ParameterError("TimePartition: nt must be at least 1");
  }

  double final_time() const { return T_; }
  std::size_t steps() const { return nt_; }
  std::size_t num_nodes() const { return nt_ + 1; }
  double dt() const { return T_ / static_cast<double>(nt_); }
  double t(std::size_t j) const {
    return j == nt_ ? T_ : T_ * static_cast<double>(j) / static_cast<double>(nt_);
  }
  /// Composite trapezoid weight of node j.
  double weight(std::size_t j) const { return (j == 0 || j == nt_) ? 0.5 * dt() : dt(); }

  friend bool operator==(const TimePartition&, const TimePartition&) = default;

 private:
  double T_;
  std::size_t nt_;
};

/// Tensor-product nodal weights: the integral over a region of the bilinear
/// interpolant of nodal data g is sum_ij wx[i] * wy[j] * g(i, j).
struct QuadratureWeights {
  std::vector<double> wx;
  std::vector<double> wy;

  double operator()(std::size_t i, std::size_t j) const { return wx[i] * wy[j]; }
};

namespace detail {

// Exact integral over [a, b] of the piecewise-linear hat functions of a 1-D node row.
inline std::vector<double> hat_weights(double lo, double h, std::size_t n, double a, double b) {
  std::vector<double> w(n + 1, 0.0);
  if (!(b > a)) return w;
  for (std::size_t c = 0; c < n; ++c) {
    const double c0 = lo + static_cast<double>(c) * h;
    const double s0 = std::max(0.0, (a - c0) / h);
    const double s1 = std::min(1.0, (b - c0) / h);
    if (s1 <= s0) continue;
    // integral of (1 - s) and s over [s0, s1], times h
    const double right = 0.5 * (s1 * s1 - s0 * s0);
    const double left = (s1 - s0) - right;
    w[c] += h * left;
    w[c + 1] += h * right;
  }
  return w;
}

}  // namespace detail

/// Weights for integrating over `region` intersected with the grid domain.
/// Cells partially covered by the region count their exact overlap, and on
/// the full domain the rule reduces to the composite trapezoid rule.
inline QuadratureWeights quadrature_weights(const Grid& g, const Domain& region) {
  const Domain& d = g.domain();
  const double ax = std::max(region.lo().x, d.lo().x), bx = std::min(region.hi().x, d.hi().x);
  const double ay = std::max(region.lo().y, d.lo().y), by = std::min(region.hi().y, d.hi().y);
  return {detail::hat_weights(d.lo().x, g.hx(), g.nx(), ax, bx),
          detail::hat_weights(d.lo().y, g.hy(), g.ny(), ay, by)};
}

inline QuadratureWeights quadrature_weights(const Grid& g) {
  return quadrature_weights(g, g.domain());
}

/// Integral over `region` of the bilinear interpolant of nodal samples g.
inline double integrate(std::span<const double> g, const Grid& grid, const Domain& region) {
  if (g.size() != grid.num_nodes())
    throw ParameterError("integrate: sample count does not match the grid");
  const QuadratureWeights w = quadrature_weights(grid, region);
  double total = 0.0;
  for (std::size_t j = 0; j <= grid.ny(); ++j) {
    if (w.wy[j] == 0.0) continue;
    double row = 0.0;
    for (std::size_t i = 0; i <= grid.nx(); ++i) row += w.wx[i] * g[grid.index(i, j)];
    total += w.wy[j] * row;
  }
  return total;
}

inline double integrate(std::span<const double> g, const Grid& grid) {
  return integrate(g, grid, grid.domain());
}

}  // namespace translab

#endif  // TRANSLAB_GEOMETRY_HPP
