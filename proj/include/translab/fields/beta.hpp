#ifndef TRANSLAB_FIELDS_BETA_HPP
#define TRANSLAB_FIELDS_BETA_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "translab/error.hpp"
#include "translab/format.hpp"

namespace translab {

/// A renormalisation nonlinearity beta with its derivative and the bound
/// C_beta >= sup|beta| + sup|beta'|. `smooth` is false for the piecewise-C0
/// targets (e.g. the hard clip) that are only used as limits of admissible ones.
struct AdmissibleBeta {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  double bound = 0.0;
  bool smooth = true;

  double operator()(double s) const { return value(s); }
};

/// beta_M(s) = s clipped to [-M, M]. Not C1.
inline AdmissibleBeta beta_truncation(double M) {
  if (!(M > 0.0)) throw ParameterError("beta_truncation: M must be positive");
  return {"clip(M=" + format_short(M) + ")",
          [M](double s) { return std::clamp(s, -M, M); },
          [M](double s) { return std::abs(s) < M ? 1.0 : 0.0; }, M + 1.0, false};
}

namespace detail {

// Rounded clip for s >= 0: identity up to M - w, the parabola with slopes 1 -> 0 on
// [M - w, M + w], then M. The parabola lies below min(s, M).
inline double rounded_clip(double s, double M, double w) {
  const double a = M - w;
  if (s <= a) return s;
  if (s >= M + w) return M;
  const double d = s - a;
  return s - d * d / (4.0 * w);
}
inline double rounded_clip_slope(double s, double M, double w) {
  const double a = M - w;
  if (s <= a) return 1.0;
  if (s >= M + w) return 0.0;
  return 1.0 - (s - a) / (2.0 * w);
}

}  // namespace detail

/// C1 approximant of beta_M that agrees with it outside the two windows
/// [+-M - w, +-M + w], w = min(1/k, M), with |beta| <= |beta_M| and
/// sup |beta - beta_M| = w / 4 < 1/k. Odd in s.
inline AdmissibleBeta beta_smooth_approx(double M, int k) {
  if (!(M > 0.0)) throw ParameterError("beta_smooth_approx: M must be positive");
  if (k < 1) throw ParameterError("beta_smooth_approx: k must be at least 1");
  const double w = std::min(1.0 / k, M);
  return {"smooth_clip(M=" + format_short(M) + ",k=" + std::to_string(k) + ")",
          [M, w](double s) { return std::copysign(detail::rounded_clip(std::abs(s), M, w), s); },
          [M, w](double s) { return detail::rounded_clip_slope(std::abs(s), M, w); },
          M + 1.0, true};
}

/// C1 approximant from below of min(|t|^p, M): g_k(|t|^p) where g_k is the identity up
/// to M - w, a parabola with slopes 1 -> 0 on [M - w, M] and the constant M - w/2
/// after, w = min(2/k, M). Increases pointwise with k.
inline AdmissibleBeta beta_bounded_power(double p, double M, int k) {
  if (!(p > 1.0)) throw ParameterError("beta_bounded_power: p must exceed 1");
  if (!(M > 0.0)) throw ParameterError("beta_bounded_power: M must be positive");
  if (k < 1) throw ParameterError("beta_bounded_power: k must be at least 1");
  const double w = std::min(2.0 / k, M);
  auto g = [M, w](double s) {
    const double a = M - w;
    if (s <= a) return s;
    if (s >= M) return M - w / 2.0;
    const double d = s - a;
    return s - d * d / (2.0 * w);
  };
  auto dg = [M, w](double s) {
    const double a = M - w;
    if (s <= a) return 1.0;
    if (s >= M) return 0.0;
    return 1.0 - (s - a) / w;
  };
  const double slope_bound = p * std::pow(M, (p - 1.0) / p);
  return {"bounded_power(p=" + format_short(p) + ",M=" + format_short(M) + ",k=" + std::to_string(k) + ")",
          [g, p](double t) { return g(std::pow(std::abs(t), p)); },
          [dg, p](double t) {
            const double a = std::abs(t);
            return dg(std::pow(a, p)) * p * std::pow(a, p - 1.0) * (t < 0.0 ? -1.0 : 1.0);
          },
          M + slope_bound, true};
}

/// beta = c.
inline AdmissibleBeta beta_constant(double c) {
  return {"constant(" + format_short(c) + ")", [c](double) { return c; }, [](double) { return 0.0; },
          std::abs(c), true};
}

/// beta^2, admissible whenever beta is.
inline AdmissibleBeta beta_squared(const AdmissibleBeta& b) {
  const double sup = b.bound;
  return {"square(" + b.name + ")", [b](double s) { const double v = b(s); return v * v; },
          [b](double s) { return 2.0 * b(s) * b.derivative(s); }, sup * sup + 2.0 * sup * sup, b.smooth};
}

}  // namespace translab

#endif  // TRANSLAB_FIELDS_BETA_HPP
