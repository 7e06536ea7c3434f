#ifndef TRANSLAB_CHARACTERISTICS_HPP
#define TRANSLAB_CHARACTERISTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "translab/error.hpp"
#include "translab/fields.hpp"
#include "translab/geometry.hpp"
#include "translab/parallel.hpp"
#include "translab/spatial_probe.hpp"

namespace translab {

/// Fixed-step RK4 integrator for dX/ds = sign * u(X, s).
///
/// The requested interval is split into the smallest number of equal steps
/// not longer than `dt`. After every step a trajectory that left the closed
/// domain by less than `clamp_tolerance` is pulled back onto it; a larger
/// excursion means the field breaks the boundary hypotheses and raises
/// IntegrationError.
class FlowMapIntegrator {
 public:
  FlowMapIntegrator(VelocityField u, double dt, double clamp_tolerance, double sign = 1.0)
      : u_(std::move(u)), dt_(dt), clamp_(clamp_tolerance), sign_(sign) {
    if (!(dt > 0.0)) throw ParameterError("FlowMapIntegrator: dt must be positive");
    if (!(clamp_tolerance >= 0.0)) throw ParameterError("FlowMapIntegrator: negative clamp tolerance");
  }

  double dt() const { return dt_; }

  Point operator()(double t_from, double t_to, Point x) const {
    if (!u_.domain().contains(x)) throw DomainError("flow_map: start point outside the domain");
    const double span = t_to - t_from;
    if (span == 0.0) return x;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(std::abs(span) / dt_ - 1e-9)));
    const double h = span / static_cast<double>(n);
    double t = t_from;
    for (std::size_t k = 0; k < n; ++k) {
      x = step(x, t, h);
      t = t_from + span * static_cast<double>(k + 1) / static_cast<double>(n);
    }
    return x;
  }

  /// One RK4 step of size h from (x, t), followed by the boundary check.
  Point step(Point x, double t, double h) const {
    const Vec2 k1 = velocity(x, t);
    const Vec2 k2 = velocity(x + 0.5 * h * k1, t + 0.5 * h);
    const Vec2 k3 = velocity(x + 0.5 * h * k2, t + 0.5 * h);
    const Vec2 k4 = velocity(x + h * k3, t + h);
    const Point y = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return keep_inside(u_.domain(), y, clamp_);
  }

  static Point keep_inside(const Domain& d, Point y, double tolerance) {
    if (d.contains(y)) return y;
    if (dist_to_boundary(d, y) <= tolerance) return d.clamp(y);
    throw IntegrationError("characteristic left the domain by more than the clamping tolerance");
  }

 private:
  Vec2 velocity(Point x, double t) const { return sign_ * u_.evaluate(x, t); }

  VelocityField u_;
  double dt_;
  double clamp_;
  double sign_;
};

/// X(t_to; t_from, x) for dX/ds = u(X, s).
inline Point flow_map(const VelocityField& u, double t_from, double t_to, Point x, double dt,
                      double clamp_tolerance = 0.0) {
  return FlowMapIntegrator(u, dt, clamp_tolerance)(t_from, t_to, x);
}

/// Foot at time 0 of the characteristic of rho_t - u . grad rho = 0 through (x, t):
/// the curve dZ/ds = -u(Z, s) with Z(t) = x, along which the solution is constant.
inline Point characteristic_foot(const VelocityField& u, double t, Point x, double dt,
                                 double clamp_tolerance = 0.0) {
  return FlowMapIntegrator(u, dt, clamp_tolerance, -1.0)(t, 0.0, x);
}

struct SolveOptions {
  /// Internal RK4 steps move a point by at most cfl * min(hx, hy).
  double cfl = 0.5;
  unsigned threads = 0;
};

/// Classical solution rho(x, t_j) = rho0(foot(x, t_j)) of rho_t - u . grad rho = 0,
/// produced one layer at a time so that several solves can advance in lockstep
/// without storing their histories. rho0 is evaluated by bilinear
/// interpolation, so every layer stays within [min rho0, max rho0].
///
/// When all stream components share one time factor a(t), u = a(t) v(x) and the
/// foot at t is the forward flow of v over A(t) = int_0^t a, so one trajectory per
/// node serves all layers. Otherwise each layer is traced back to t = 0.
class ClassicalSolver {
 public:
  ClassicalSolver(Layer rho0, VelocityField u, TimePartition times, SolveOptions options = {})
      : rho0_(std::move(rho0)), u_(std::move(u)), times_(times), options_(options), layer_(rho0_),
        h_(rho0_.grid().min_spacing()) {
    const Grid& grid = rho0_.grid();
    if (!(grid.domain() == u_.domain())) throw ParameterError("solve_classical: grid and field domains differ");
    if (!(options.cfl > 0.0)) throw ParameterError("solve_classical: cfl must be positive");
    if (!u_.components().empty() && u_.support_margin() < h_)
      throw SupportError("solve_classical: velocity support closer than one cell to the boundary");
    for (std::size_t k = 0; k < grid.num_nodes(); ++k) {
      if (u_.in_support(grid.node(k))) {
        active_.push_back(k);
        pos_.push_back(grid.node(k));
      }
    }
    modulation_ = u_.common_modulation();
    if (modulation_) {
      speed_ = u_.peak_speed_unmodulated();
    } else {
      const double speed = u_.peak_speed_bound(0.0, times_.final_time());
      back_dt_ = speed > 0.0 ? std::min(times_.dt(), options_.cfl * h_ / speed) : times_.dt();
    }
  }

  std::size_t index() const { return j_; }
  double time() const { return times_.t(j_); }
  const Layer& layer() const { return layer_; }
  const TimePartition& times() const { return times_; }
  bool done() const { return j_ == times_.steps(); }

  /// Moves to the next time node; returns false when already at T.
  bool advance() {
    if (done()) return false;
    const Grid& grid = rho0_.grid();
    if (modulation_) {
      const VelocityField v = u_.frozen_in_time();
      const FlowMapIntegrator flow(v, 1.0, h_);
      const double span = modulation_->integral(times_.t(j_ + 1)) - modulation_->integral(times_.t(j_));
      const auto m = static_cast<std::size_t>(
          std::max(1.0, std::ceil(std::abs(span) * speed_ / (options_.cfl * h_) - 1e-9)));
      const double step = span / static_cast<double>(m);
      parallel_for(active_.size(), [&](std::size_t n) {
        Point x = pos_[n];
        for (std::size_t s = 0; s < m; ++s) x = flow.step(x, 0.0, step);
        pos_[n] = x;
        layer_[active_[n]] = rho0_.interpolate(x);
      }, options_.threads);
    } else {
      const FlowMapIntegrator back(u_, back_dt_, h_, -1.0);
      const double t = times_.t(j_ + 1);
      parallel_for(active_.size(), [&](std::size_t n) {
        layer_[active_[n]] = rho0_.interpolate(back(t, 0.0, grid.node(active_[n])));
      }, options_.threads);
    }
    ++j_;
    return true;
  }

 private:
  Layer rho0_;
  VelocityField u_;
  TimePartition times_;
  SolveOptions options_;
  Layer layer_;
  double h_;
  std::size_t j_ = 0;
  std::vector<std::size_t> active_;
  std::vector<Point> pos_;
  std::optional<TimeModulation> modulation_;
  double speed_ = 0.0;
  double back_dt_ = 0.0;
};

/// Runs a ClassicalSolver to T, passing every layer to sink(j, layer) in order.
template <class Sink>
void solve_classical_stream(const Layer& rho0, const VelocityField& u, const TimePartition& times,
                            Sink&& sink, const SolveOptions& options = {}) {
  ClassicalSolver solver(rho0, u, times, options);
  sink(solver.index(), solver.layer());
  while (solver.advance()) sink(solver.index(), solver.layer());
}

inline ScalarField solve_classical(const Layer& rho0, const VelocityField& u, const TimePartition& times,
                                   const SolveOptions& options = {}) {
  ScalarField out(rho0.grid(), times);
  solve_classical_stream(rho0, u, times, [&](std::size_t, const Layer& l) { out.push_back(l); }, options);
  return out;
}

/// |int rho(t_j0) phi - int rho0 phi + int_0^{t_j0} int rho (u . grad phi)|, the
/// time-slice form of the weak equation for a purely spatial test function.
inline double slice_identity_residual(const ScalarField& rho, const Layer& rho0, const VelocityField& u,
                                      const SpatialBump& phi, std::size_t j0) {
  if (j0 >= rho.num_layers()) throw ParameterError("slice_identity_residual: time index out of range");
  const SpatialProbe probe(rho.grid(), phi, u);
  const TimePartition& times = rho.times();
  double flux = 0.0;
  for (std::size_t j = 0; j <= j0 && j0 > 0; ++j) {
    const double w = (j == 0 || j == j0) ? 0.5 * times.dt() : times.dt();
    flux += w * probe.flux(rho.layer(j).values(), times.t(j));
  }
  return std::abs(probe.mass(rho.layer(j0).values()) - probe.mass(rho0.values()) + flux);
}

}  // namespace translab

#endif  // TRANSLAB_CHARACTERISTICS_HPP
