#ifndef TRANSLAB_FIELDS_KERNEL_HPP
#define TRANSLAB_FIELDS_KERNEL_HPP

#include <cmath>
#include <numbers>

#include "translab/error.hpp"
#include "translab/geometry.hpp"

namespace translab {

namespace detail {

// int_{B(0,1)} exp(-1/(1 - |x|^2)) dx = pi int_0^1 exp(-1/(1 - s)) ds,
// by composite Simpson on 2^16 panels (the integrand is flat at both ends).
inline double standard_bump_mass() {
  static const double mass = [] {
    constexpr int n = 1 << 16;
    const double h = 1.0 / n;
    auto f = [](double s) { return s >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - s)); };
    double sum = f(0.0) + f(1.0);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return std::numbers::pi * sum * h / 3.0;
  }();
  return mass;
}

}  // namespace detail

/// eta_eps(x) = eps^-2 eta(x / eps) with eta(x) = Z exp(-1/(1 - |x|^2)) on the unit disc.
class Kernel {
 public:
  enum class Profile { standard_bump };

  Kernel(Profile profile, double eps) : profile_(profile), eps_(eps) {
    if (!(eps > 0.0)) throw ParameterError("make_kernel: eps must be positive");
    norm_ = 1.0 / detail::standard_bump_mass();
  }

  Profile profile() const { return profile_; }
  double eps() const { return eps_; }
  /// The normalising constant Z of the base profile.
  double normalization() const { return norm_; }

  double operator()(Vec2 z) const {
    const double s = dot(z, z) / (eps_ * eps_);
    if (s >= 1.0) return 0.0;
    return norm_ * std::exp(-1.0 / (1.0 - s)) / (eps_ * eps_);
  }

  /// Closed-form gradient of eta_eps at z.
  Vec2 gradient(Vec2 z) const {
    const double s = dot(z, z) / (eps_ * eps_);
    if (s >= 1.0) return {};
    const double q = 1.0 / (1.0 - s);
    const double f = -norm_ * std::exp(-q) * q * q * 2.0 / (eps_ * eps_ * eps_ * eps_);
    return {f * z.x, f * z.y};
  }

 private:
  Profile profile_;
  double eps_;
  double norm_;
};

inline Kernel make_kernel(double eps, Kernel::Profile profile = Kernel::Profile::standard_bump) {
  return Kernel(profile, eps);
}

}  // namespace translab

#endif  // TRANSLAB_FIELDS_KERNEL_HPP
