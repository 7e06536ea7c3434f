#ifndef TRANSLAB_FIELDS_SCALAR_FIELD_HPP
#define TRANSLAB_FIELDS_SCALAR_FIELD_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "translab/error.hpp"
#include "translab/geometry.hpp"

namespace translab {

/// Nodal values of a density on a grid at one instant, bilinearly interpolated.
class Layer {
 public:
  explicit Layer(Grid grid) : grid_(std::move(grid)), values_(grid_.num_nodes(), 0.0) {}
  Layer(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.num_nodes())
      throw ParameterError("Layer: value count does not match the grid");
  }

  template <class F>
  static Layer sample(const Grid& grid, F&& f) {
    Layer out(grid);
    for (std::size_t k = 0; k < grid.num_nodes(); ++k) out.values_[k] = f(grid.node(k));
    return out;
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[grid_.index(i, j)]; }

  /// Bilinear interpolation; throws DomainError outside the closed domain.
  double at(Point p) const {
    if (!grid_.domain().contains(p)) throw DomainError("Layer::at: point outside the domain");
    return interpolate(p);
  }

  /// Bilinear interpolation without the domain check (p is clamped into the grid).
  double interpolate(Point p) const {
    const Grid::Cell c = grid_.locate(p);
    const std::size_t k = grid_.index(c.i, c.j);
    const std::size_t stride = grid_.nx() + 1;
    const double v00 = values_[k], v10 = values_[k + 1];
    const double v01 = values_[k + stride], v11 = values_[k + stride + 1];
    return (1.0 - c.fy) * ((1.0 - c.fx) * v00 + c.fx * v10) + c.fy * ((1.0 - c.fx) * v01 + c.fx * v11);
  }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  Layer& operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
  }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// A density sampled at every node of a time partition.
class ScalarField {
 public:
  ScalarField(Grid grid, TimePartition times) : grid_(std::move(grid)), times_(times) {
    layers_.reserve(times_.num_nodes());
  }

  const Grid& grid() const { return grid_; }
  const TimePartition& times() const { return times_; }
  std::size_t num_layers() const { return layers_.size(); }
  bool complete() const { return layers_.size() == times_.num_nodes(); }

  const Layer& layer(std::size_t j) const { return layers_.at(j); }
  Layer& layer(std::size_t j) { return layers_.at(j); }

  void push_back(Layer layer) {
    if (!(layer.grid() == grid_)) throw ParameterError("ScalarField: layer grid mismatch");
    if (layers_.size() == times_.num_nodes()) throw ParameterError("ScalarField: too many layers");
    layers_.push_back(std::move(layer));
  }

  /// Value at (p, t_j); p must lie in the closed domain.
  double at(Point p, std::size_t j) const { return layer(j).at(p); }

  /// Constant-in-time field holding `layer` at every node (used for frozen/non-solution probes).
  static ScalarField frozen(const Layer& layer, const TimePartition& times) {
    ScalarField f(layer.grid(), times);
    for (std::size_t j = 0; j < times.num_nodes(); ++j) f.push_back(layer);
    return f;
  }

 private:
  Grid grid_;
  TimePartition times_;
  std::vector<Layer> layers_;
};

/// Integral of a layer over the whole domain (composite trapezoid).
inline double integrate(const Layer& layer) { return integrate(layer.values(), layer.grid()); }
inline double integrate(const Layer& layer, const Domain& region) {
  return integrate(layer.values(), layer.grid(), region);
}

/// Closed-form initial densities used by the studies.
struct GaussianBlob {
  Point center{0.5, 0.5};
  double sigma = 0.08;
  double amplitude = 1.0;

  double operator()(Point p) const {
    const Vec2 d = p - center;
    return amplitude * std::exp(-dot(d, d) / (2.0 * sigma * sigma));
  }
};

}  // namespace translab

#endif  // TRANSLAB_FIELDS_SCALAR_FIELD_HPP
