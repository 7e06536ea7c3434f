#ifndef TRANSLAB_TESTS_ORACLES_HPP
#define TRANSLAB_TESTS_ORACLES_HPP

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "translab/geometry.hpp"

namespace oracle {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// three-term recurrence (written independently of the library's rule).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5)), dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

/// Integral of f over the disc B(x, r): Gauss-Legendre in the radius,
/// trapezoid (spectrally accurate for periodic integrands) in the angle.
template <class F>
double disc_integral(F&& f, translab::Point x, double r, int nr = 96, int ntheta = 256) {
  const auto [gx, gw] = gauss_legendre(nr);
  double s = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double rho = 0.5 * r * (gx[i] + 1.0), wr = 0.5 * r * gw[i];
    for (int k = 0; k < ntheta; ++k) {
      const double th = 2.0 * std::numbers::pi * k / ntheta;
      s += wr * rho * (2.0 * std::numbers::pi / ntheta) * f(translab::Point{x.x + rho * std::cos(th), x.y + rho * std::sin(th)});
    }
  }
  return s;
}

/// Standard mollifier written out from its definition, with the normalising
/// constant 1 / int_{B(0,1)} exp(-1/(1-|x|^2)) dx taken from a 30-digit reference value.
struct Mollifier {
  double eps;
  static constexpr double kMass = 0.466512393178330068879556171895;

  double operator()(translab::Vec2 z) const {
    const double s = (z.x * z.x + z.y * z.y) / (eps * eps);
    return s >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - s)) / (kMass * eps * eps);
  }
  translab::Vec2 gradient(translab::Vec2 z) const {
    const double s = (z.x * z.x + z.y * z.y) / (eps * eps);
    if (s >= 1.0) return {0.0, 0.0};
    const double q = 1.0 / (1.0 - s);
    const double f = -std::exp(-q) * q * q * 2.0 / (kMass * eps * eps * eps * eps);
    return {f * z.x, f * z.y};
  }
};

}  // namespace oracle

#endif  // TRANSLAB_TESTS_ORACLES_HPP
