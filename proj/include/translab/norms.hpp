#ifndef TRANSLAB_NORMS_HPP
#define TRANSLAB_NORMS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "translab/error.hpp"
#include "translab/fields/scalar_field.hpp"
#include "translab/fields/velocity.hpp"
#include "translab/geometry.hpp"

namespace translab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace detail {

inline double lp_from_weights(std::span<const double> g, const Grid& grid, const QuadratureWeights& w,
                              double p) {
  double total = 0.0;
  for (std::size_t j = 0; j <= grid.ny(); ++j) {
    if (w.wy[j] == 0.0) continue;
    double row = 0.0;
    for (std::size_t i = 0; i <= grid.nx(); ++i) {
      if (w.wx[i] == 0.0) continue;
      const double a = std::abs(g[grid.index(i, j)]);
      row += w.wx[i] * (p == 1.0 ? a : p == 2.0 ? a * a : std::pow(a, p));
    }
    total += w.wy[j] * row;
  }
  return p == 1.0 ? total : std::pow(total, 1.0 / p);
}

}  // namespace detail

/// (int_region |g|^p)^(1/p) by the grid quadrature; p = inf gives the largest
/// |g| over nodes whose quadrature weight in the region is nonzero.
/// Exponents in (0, 1) give the quasi-norm and are only reachable through
/// lp_quasi_norm.
inline double lp_quasi_norm(std::span<const double> g, const Grid& grid, double p, const Domain& region) {
  if (!(p > 0.0)) throw ParameterError("lp norm: exponent must be positive");
  if (g.size() != grid.num_nodes()) throw ParameterError("lp norm: sample count does not match the grid");
  const QuadratureWeights w = quadrature_weights(grid, region);
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t j = 0; j <= grid.ny(); ++j)
      for (std::size_t i = 0; i <= grid.nx(); ++i)
        if (w.wx[i] > 0.0 && w.wy[j] > 0.0) m = std::max(m, std::abs(g[grid.index(i, j)]));
    return m;
  }
  return detail::lp_from_weights(g, grid, w, p);
}

inline double lp_norm(std::span<const double> g, const Grid& grid, double p, const Domain& region) {
  if (!(p >= 1.0)) throw ParameterError("lp_norm: p must lie in [1, inf]");
  return lp_quasi_norm(g, grid, p, region);
}

inline double lp_norm(const Layer& layer, double p) {
  return lp_norm(layer.values(), layer.grid(), p, layer.grid().domain());
}

inline double lp_norm(const Layer& layer, double p, const Domain& region) {
  return lp_norm(layer.values(), layer.grid(), p, region);
}

/// int_0^T ||u(t)||_X dt by the trapezoid rule on `times`, with X = L^p (|u|
/// Euclidean) or, with include_gradient, W^{1,p} normed as ||u||_p + ||Du||_p
/// (|Du| Frobenius). Spatial integrals use the nodes of `grid`.
inline double bochner_norm_u(const VelocityField& u, const TimePartition& times, double p_space,
                             bool include_gradient, const Grid& grid) {
  if (!(p_space >= 1.0)) throw ParameterError("bochner_norm_u: p must lie in [1, inf]");
  if (u.is_zero()) return 0.0;

  auto spatial = [&](const VelocityField& field, double t) {
    std::vector<double> mag(grid.num_nodes()), grad(grid.num_nodes());
    for (std::size_t k = 0; k < grid.num_nodes(); ++k) {
      const Point x = grid.node(k);
      mag[k] = norm(field.evaluate(x, t));
      if (include_gradient) grad[k] = field.jacobian(x, t).frobenius();
    }
    double n = lp_norm(mag, grid, p_space, grid.domain());
    if (include_gradient) n += lp_norm(grad, grid, p_space, grid.domain());
    return n;
  };

  double total = 0.0;
  if (const auto a = u.common_modulation()) {
    const double base = spatial(u.frozen_in_time(), 0.0);
    for (std::size_t j = 0; j < times.num_nodes(); ++j)
      total += times.weight(j) * std::abs(a->value(times.t(j))) * base;
    return total;
  }
  for (std::size_t j = 0; j < times.num_nodes(); ++j) total += times.weight(j) * spatial(u, times.t(j));
  return total;
}

}  // namespace translab

#endif  // TRANSLAB_NORMS_HPP
