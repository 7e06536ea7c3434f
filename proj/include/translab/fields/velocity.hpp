#ifndef TRANSLAB_FIELDS_VELOCITY_HPP
#define TRANSLAB_FIELDS_VELOCITY_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "translab/error.hpp"
#include "translab/geometry.hpp"

namespace translab {

/// Scalar time factor a(t) multiplying a stream function.
struct TimeModulation {
  enum class Kind {
    constant,      // a(t) = 1
    linear,        // a(t) = t
    inverse_sqrt,  // a(t) = max(t, floor)^(-1/2): integrable, unbounded as floor -> 0
  };
  static constexpr double kSqrtFloor = 1e-6;

  Kind kind = Kind::constant;

  double value(double t) const {
    switch (kind) {
      case Kind::constant: return 1.0;
      case Kind::linear: return t;
      case Kind::inverse_sqrt: return 1.0 / std::sqrt(std::max(t, kSqrtFloor));
    }
    return 1.0;
  }

  /// Closed-form primitive A(t) = int_0^t a.
  double integral(double t) const {
    switch (kind) {
      case Kind::constant: return t;
      case Kind::linear: return 0.5 * t * t;
      case Kind::inverse_sqrt: {
        const double s = std::sqrt(kSqrtFloor);
        if (t <= kSqrtFloor) return t / s;
        return s + 2.0 * (std::sqrt(t) - s);
      }
    }
    return t;
  }

  /// sup of |a| over [t0, t1].
  double max_abs(double t0, double t1) const {
    switch (kind) {
      case Kind::constant: return 1.0;
      case Kind::linear: return std::max(std::abs(t0), std::abs(t1));
      case Kind::inverse_sqrt: return value(std::min(t0, t1));
    }
    return 1.0;
  }

  std::string name() const {
    switch (kind) {
      case Kind::constant: return "constant";
      case Kind::linear: return "linear";
      case Kind::inverse_sqrt: return "inverse_sqrt";
    }
    return "constant";
  }

  static TimeModulation from_name(const std::string& s) {
    if (s == "constant") return {Kind::constant};
    if (s == "linear") return {Kind::linear};
    if (s == "inverse_sqrt") return {Kind::inverse_sqrt};
    throw ParameterError("unknown time modulation '" + s + "'");
  }

  friend bool operator==(TimeModulation, TimeModulation) = default;
};

struct Hessian {
  double xx = 0.0, xy = 0.0, yy = 0.0;
};

/// 2x2 Jacobian d u_i / d x_j.
struct Jacobian {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;
  double trace() const { return a11 + a22; }
  double frobenius() const { return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22); }
};

/// Radial bump psi(x, t) = A a(t) b(|x - c|^2 / R^2) with b(s) = exp(1 - 1/(1 - s)) for
/// s < 1 and 0 otherwise. b is smooth, b(0) = 1, and vanishes with all derivatives at s = 1.
struct StreamFunction {
  Point center{0.5, 0.5};
  double radius = 0.3;
  double amplitude = 0.5;
  TimeModulation modulation{};

  // b and its first two derivatives with respect to s.
  struct Profile {
    double b = 0.0, db = 0.0, d2b = 0.0;
  };
  static Profile profile(double s) {
    if (s >= 1.0) return {};
    const double q = 1.0 / (1.0 - s);
    const double b = std::exp(1.0 - q);
    return {b, -b * q * q, b * (2.0 * s - 1.0) * q * q * q * q};
  }

  bool in_support(Point p) const {
    const Vec2 d = p - center;
    return dot(d, d) < radius * radius;
  }

  double value(Point p, double t) const {
    const Vec2 d = p - center;
    return amplitude * modulation.value(t) * profile(dot(d, d) / (radius * radius)).b;
  }

  Vec2 gradient(Point p, double t) const {
    const Vec2 d = p - center;
    const double r2 = radius * radius;
    const Profile pr = profile(dot(d, d) / r2);
    const double f = amplitude * modulation.value(t) * pr.db * 2.0 / r2;
    return {f * d.x, f * d.y};
  }

  Hessian hessian(Point p, double t) const {
    const Vec2 d = p - center;
    const double r2 = radius * radius;
    const Profile pr = profile(dot(d, d) / r2);
    const double a = amplitude * modulation.value(t);
    const double gx = 2.0 * d.x / r2, gy = 2.0 * d.y / r2;
    return {a * (pr.d2b * gx * gx + pr.db * 2.0 / r2), a * pr.d2b * gx * gy,
            a * (pr.d2b * gy * gy + pr.db * 2.0 / r2)};
  }
};

/// Superposition of stream-function components: u = (d psi / dy, -d psi / dx).
/// Divergence free by construction and zero outside every component's support.
class VelocityField {
 public:
  explicit VelocityField(Domain domain) : domain_(domain) {}

  const Domain& domain() const { return domain_; }
  const std::vector<StreamFunction>& components() const { return components_; }
  bool is_zero() const {
    return std::all_of(components_.begin(), components_.end(),
                       [](const StreamFunction& s) { return s.amplitude == 0.0; });
  }

  /// Adds a component; its support must sit strictly inside the domain with
  /// at least `min_margin` to spare.
  VelocityField& add(const StreamFunction& psi, double min_margin = 0.0) {
    if (!(psi.radius > 0.0)) throw ParameterError("stream function radius must be positive");
    if (!domain_.interior(psi.center) ||
        dist_to_boundary(domain_, psi.center) - psi.radius <= min_margin)
      throw SupportError("stream function support touches the boundary of the domain");
    components_.push_back(psi);
    return *this;
  }

  /// u(x, t) in closed form; throws DomainError outside the closed domain.
  Vec2 operator()(Point x, double t) const {
    if (!domain_.contains(x)) throw DomainError("eval_velocity: point outside the domain");
    return evaluate(x, t);
  }

  Vec2 evaluate(Point x, double t) const {
    Vec2 u{};
    for (const auto& s : components_) {
      if (!s.in_support(x)) continue;
      const Vec2 g = s.gradient(x, t);
      u = u + Vec2{g.y, -g.x};
    }
    return u;
  }

  Jacobian jacobian(Point x, double t) const {
    Jacobian j{};
    for (const auto& s : components_) {
      if (!s.in_support(x)) continue;
      const Hessian h = s.hessian(x, t);
      j.a11 += h.xy;
      j.a12 += h.yy;
      j.a21 -= h.xx;
      j.a22 -= h.xy;
    }
    return j;
  }

  /// Distance between the union of supports and the boundary.
  double support_margin() const {
    double m = 0.5 * std::min(domain_.width(), domain_.height());
    for (const auto& s : components_) m = std::min(m, dist_to_boundary(domain_, s.center) - s.radius);
    return m;
  }

  bool in_support(Point x) const {
    return std::any_of(components_.begin(), components_.end(),
                       [&](const StreamFunction& s) { return s.in_support(x); });
  }

  /// The time factor shared by all components, if there is one; then
  /// u(x, t) = a(t) v(x) with v = u at a = 1.
  std::optional<TimeModulation> common_modulation() const {
    if (components_.empty()) return TimeModulation{};
    const TimeModulation m = components_.front().modulation;
    for (const auto& s : components_)
      if (!(s.modulation == m)) return std::nullopt;
    return m;
  }

  /// Field with every amplitude multiplied by `factor`.
  VelocityField scaled(double factor) const {
    VelocityField out(*this);
    for (auto& s : out.components_) s.amplitude *= factor;
    return out;
  }

  /// Same field with a(t) = 1 for every component.
  VelocityField frozen_in_time() const {
    VelocityField out(*this);
    for (auto& s : out.components_) s.modulation = TimeModulation{};
    return out;
  }

  /// Upper bound on sup_x |u(x, t)| / |a(t)| for fields with a common modulation,
  /// taken as the sum of per-component peak speeds (exact for one component).
  double peak_speed_unmodulated() const {
    double total = 0.0;
    for (const auto& s : components_) total += std::abs(s.amplitude) * unit_peak_speed() / s.radius;
    return total;
  }

  /// Upper bound on sup |u(x, t)| over t in [t0, t1].
  double peak_speed_bound(double t0, double t1) const {
    double total = 0.0;
    for (const auto& s : components_)
      total += std::abs(s.amplitude) * s.modulation.max_abs(t0, t1) * unit_peak_speed() / s.radius;
    return total;
  }

 private:
  // max over s in [0,1) of |b'(s)| * 2 sqrt(s), the peak speed of a unit-amplitude,
  // unit-radius component. Evaluated once by a dense scan plus golden-section polish.
  static double unit_peak_speed() {
    static const double value = [] {
      auto speed = [](double r) {
        const double s = r * r;
        return std::abs(StreamFunction::profile(s).db) * 2.0 * r;
      };
      double best_r = 0.0, best = 0.0;
      for (int i = 1; i < 4000; ++i) {
        const double r = i / 4000.0;
        if (speed(r) > best) best = speed(r), best_r = r;
      }
      double a = std::max(0.0, best_r - 1.0 / 4000), b = std::min(1.0, best_r + 1.0 / 4000);
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int it = 0; it < 100; ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (speed(c) > speed(d)) b = d; else a = c;
      }
      return std::max(best, speed(0.5 * (a + b))) * (1.0 + 1e-9);
    }();
    return value;
  }

  Domain domain_;
  std::vector<StreamFunction> components_;
};

/// Builds u = (psi_y, -psi_x); the support of psi must be strictly interior.
inline VelocityField from_stream_function(const Domain& domain, const StreamFunction& psi) {
  VelocityField u(domain);
  u.add(psi);
  return u;
}

inline Vec2 eval_velocity(const VelocityField& u, Point x, double t) { return u(x, t); }

}  // namespace translab

#endif  // TRANSLAB_FIELDS_VELOCITY_HPP
