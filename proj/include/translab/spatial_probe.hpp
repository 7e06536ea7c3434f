#ifndef TRANSLAB_SPATIAL_PROBE_HPP
#define TRANSLAB_SPATIAL_PROBE_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "translab/fields/test_function.hpp"
#include "translab/fields/velocity.hpp"
#include "translab/geometry.hpp"

namespace translab {

/// Precomputed quadrature of a spatial test bump against nodal data:
///   mass(g) = int g phi dx,   flux(g, t) = int g (u(., t) . grad phi) dx,
/// restricted to the nodes inside the bump's bounding box (phi vanishes elsewhere).
class SpatialProbe {
 public:
  SpatialProbe(const Grid& grid, const SpatialBump& phi, const VelocityField& u)
      : phi_(phi), u_(u), modulation_(u.common_modulation()) {
    const VelocityField unmodulated = u.frozen_in_time();
    const QuadratureWeights w = quadrature_weights(grid);
    const Domain box = phi.bounding_box();
    for (std::size_t j = 0; j <= grid.ny(); ++j) {
      const double y = grid.y(j);
      if (y < box.lo().y || y > box.hi().y) continue;
      for (std::size_t i = 0; i <= grid.nx(); ++i) {
        const double x = grid.x(i);
        if (x < box.lo().x || x > box.hi().x) continue;
        const Point p{x, y};
        const double wq = w(i, j);
        const double v = phi.value(p);
        const Vec2 g = phi.gradient(p);
        if (v == 0.0 && g.x == 0.0 && g.y == 0.0) continue;
        nodes_.push_back(grid.index(i, j));
        points_.push_back(p);
        w_phi_.push_back(wq * v);
        w_grad_.push_back(wq * g);
        // a(t) is factored out when every component shares it
        w_flux_.push_back(modulation_ ? wq * dot(unmodulated.evaluate(p, 0.0), g) : 0.0);
      }
    }
  }

  const SpatialBump& bump() const { return phi_; }
  std::size_t size() const { return nodes_.size(); }

  template <class Map = std::nullptr_t>
  double mass(std::span<const double> g, Map&& map = nullptr) const {
    double s = 0.0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) s += apply(map, g[nodes_[k]]) * w_phi_[k];
    return s;
  }

  /// {mass, flux} with one evaluation of the map per node.
  template <class Map = std::nullptr_t>
  std::pair<double, double> moments(std::span<const double> g, double t, Map&& map = nullptr) const {
    double m = 0.0, f = 0.0;
    if (modulation_) {
      for (std::size_t k = 0; k < nodes_.size(); ++k) {
        const double v = apply(map, g[nodes_[k]]);
        m += v * w_phi_[k];
        f += v * w_flux_[k];
      }
      return {m, f * modulation_->value(t)};
    }
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      const double v = apply(map, g[nodes_[k]]);
      m += v * w_phi_[k];
      f += v * dot(u_.evaluate(points_[k], t), w_grad_[k]);
    }
    return {m, f};
  }

  template <class Map = std::nullptr_t>
  double flux(std::span<const double> g, double t, Map&& map = nullptr) const {
    double s = 0.0;
    if (modulation_) {
      for (std::size_t k = 0; k < nodes_.size(); ++k) s += apply(map, g[nodes_[k]]) * w_flux_[k];
      return s * modulation_->value(t);
    }
    for (std::size_t k = 0; k < nodes_.size(); ++k)
      s += apply(map, g[nodes_[k]]) * dot(u_.evaluate(points_[k], t), w_grad_[k]);
    return s;
  }

 private:
  template <class Map>
  static double apply(const Map& map, double v) {
    if constexpr (std::is_same_v<std::decay_t<Map>, std::nullptr_t>) return v;
    else return map(v);
  }

  SpatialBump phi_;
  VelocityField u_;
  std::optional<TimeModulation> modulation_;
  std::vector<std::size_t> nodes_;
  std::vector<Point> points_;
  std::vector<double> w_phi_;
  std::vector<Vec2> w_grad_;
  std::vector<double> w_flux_;
};

}  // namespace translab

#endif  // TRANSLAB_SPATIAL_PROBE_HPP
