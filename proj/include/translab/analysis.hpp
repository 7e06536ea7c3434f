#ifndef TRANSLAB_ANALYSIS_HPP
#define TRANSLAB_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "translab/characteristics.hpp"
#include "translab/error.hpp"
#include "translab/fields.hpp"
#include "translab/geometry.hpp"
#include "translab/norms.hpp"
#include "translab/parallel.hpp"

namespace translab {

// ---------------------------------------------------------------------------
// Norm conservation
// ---------------------------------------------------------------------------

struct NormReport {
  double p = 1.0;
  double reference = 0.0;      // ||rho0||_p
  std::vector<double> times;   // t_j
  std::vector<double> norms;   // ||rho(t_j)||_p
  double drift = 0.0;          // max_j | ||rho(t_j)||_p - ||rho0||_p | / ||rho0||_p
  double growth = 0.0;         // max_j (||rho(t_j)||_p - ||rho0||_p) / ||rho0||_p, clipped at 0
  double tolerance = 0.0;
  std::vector<std::size_t> flagged;  // nodes whose relative drift exceeds the tolerance

  bool pass() const { return flagged.empty(); }
};

namespace detail {
inline double relative(double v, double ref) {
  if (ref == 0.0) return v == 0.0 ? 0.0 : kInfinity;
  return (v - ref) / ref;
}
}  // namespace detail

/// Streaming conservation diagnostics; layer 0 (or the explicit reference)
/// fixes ||rho0||_p.
class ConservationAccumulator {
 public:
  ConservationAccumulator(std::vector<double> p_list, std::vector<double> tolerances)
      : p_(std::move(p_list)), tol_(std::move(tolerances)) {
    if (p_.empty()) throw ParameterError("conservation_report: empty exponent list");
    if (tol_.size() == 1) tol_.assign(p_.size(), tol_.front());
    if (tol_.size() != p_.size()) throw ParameterError("conservation_report: one tolerance per exponent");
    for (std::size_t k = 0; k < p_.size(); ++k) {
      if (!(p_[k] >= 1.0)) throw ParameterError("conservation_report: p must lie in [1, inf]");
      reports_.push_back({p_[k], 0.0, {}, {}, 0.0, 0.0, tol_[k], {}});
    }
  }

  void set_reference(const Layer& rho0) {
    for (auto& r : reports_) r.reference = lp_norm(rho0, r.p);
    has_reference_ = true;
  }

  void add_layer(std::size_t j, double t, const Layer& rho) {
    if (!has_reference_) set_reference(rho);
    for (auto& r : reports_) {
      const double n = lp_norm(rho, r.p);
      const double rel = detail::relative(n, r.reference);
      r.times.push_back(t);
      r.norms.push_back(n);
      r.drift = std::max(r.drift, std::abs(rel));
      r.growth = std::max(r.growth, rel);
      if (std::abs(rel) > r.tolerance) r.flagged.push_back(j);
    }
  }

  const std::vector<NormReport>& reports() const { return reports_; }

 private:
  std::vector<double> p_;
  std::vector<double> tol_;
  std::vector<NormReport> reports_;
  bool has_reference_ = false;
};

inline std::vector<NormReport> conservation_report(const ScalarField& rho, const std::vector<double>& p_list,
                                                   std::vector<double> tolerances = {1e-3}) {
  if (rho.num_layers() == 0) throw ParameterError("conservation_report: empty field");
  ConservationAccumulator acc(p_list, std::move(tolerances));
  acc.set_reference(rho.layer(0));
  for (std::size_t j = 0; j < rho.num_layers(); ++j) acc.add_layer(j, rho.times().t(j), rho.layer(j));
  return acc.reports();
}

// ---------------------------------------------------------------------------
// Uniform integrability
// ---------------------------------------------------------------------------

struct TruncationProfile {
  std::vector<double> eps;
  std::vector<double> threshold;  // M_eps
  std::vector<double> tail;       // sup over the family of int_{|rho| > M_eps} |rho|
};

namespace detail {

// Nodal |values| sorted descending with the running sums of weight * |value|.
struct SortedTail {
  std::vector<double> values;
  std::vector<double> cumulative;

  SortedTail(const Layer& l, const QuadratureWeights& w) {
    const Grid& g = l.grid();
    std::vector<std::pair<double, double>> items;
    items.reserve(g.num_nodes());
    for (std::size_t j = 0; j <= g.ny(); ++j)
      for (std::size_t i = 0; i <= g.nx(); ++i) {
        const double a = std::abs(l(i, j));
        items.emplace_back(a, w(i, j) * a);
      }
    std::sort(items.begin(), items.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    double run = 0.0;
    for (const auto& [a, c] : items) {
      run += c;
      values.push_back(a);
      cumulative.push_back(run);
    }
  }

  // quadrature of |rho| over {|rho| > m}
  double tail(double m) const {
    const auto it = std::partition_point(values.begin(), values.end(), [m](double v) { return v > m; });
    const auto n = static_cast<std::size_t>(it - values.begin());
    return n == 0 ? 0.0 : cumulative[n - 1];
  }
};

}  // namespace detail

/// Tail integral of one layer above level m (nodal quadrature).
inline double tail_integral(const Layer& l, double m) {
  double s = 0.0;
  const QuadratureWeights w = quadrature_weights(l.grid());
  for (std::size_t j = 0; j <= l.grid().ny(); ++j)
    for (std::size_t i = 0; i <= l.grid().nx(); ++i)
      if (std::abs(l(i, j)) > m) s += w(i, j) * std::abs(l(i, j));
  return s;
}

/// For every eps the smallest M among the attained nodal levels (and 0) with
/// sup_family tail(M) < eps. The tail is a right-continuous step function of M
/// that only jumps at attained levels, so no smaller real M qualifies.
inline TruncationProfile truncation_thresholds(const std::vector<Layer>& family, const std::vector<double>& eps_list) {
  if (family.empty()) throw ParameterError("truncation_thresholds: empty family");
  const QuadratureWeights w = quadrature_weights(family.front().grid());
  std::vector<detail::SortedTail> tails;
  std::vector<double> levels{0.0};
  for (const Layer& l : family) {
    if (!(l.grid() == family.front().grid())) throw ParameterError("truncation_thresholds: grids differ");
    tails.emplace_back(l, w);
    levels.insert(levels.end(), tails.back().values.begin(), tails.back().values.end());
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  auto sup_tail = [&](double m) {
    double s = 0.0;
    for (const auto& t : tails) s = std::max(s, t.tail(m));
    return s;
  };

  TruncationProfile out;
  for (double eps : eps_list) {
    if (!(eps > 0.0)) throw ParameterError("truncation_thresholds: eps must be positive");
    // sup_tail is nonincreasing in the level, so binary search the first level that qualifies
    const auto it = std::partition_point(levels.begin(), levels.end(), [&](double m) { return !(sup_tail(m) < eps); });
    const double m = it == levels.end() ? levels.back() : *it;
    out.eps.push_back(eps);
    out.threshold.push_back(m);
    out.tail.push_back(sup_tail(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Boundary layer
// ---------------------------------------------------------------------------

namespace detail {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(unsigned n) {
  std::vector<double> x(n), w(n);
  for (unsigned i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = std::legendre(n, z), pm = std::legendre(n - 1, z);
      dp = n * (z * p - pm) / (z * z - 1.0);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double p = std::legendre(n, z), pm = std::legendre(n - 1, z);
    dp = n * (z * p - pm) / (z * z - 1.0);
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

// Tensor Gauss-Legendre on a rectangle split into panels no wider than `panel`.
template <class F>
double integrate_rect(const F& f, Point lo, Point hi, double panel) {
  static const auto rule = gauss_legendre(8);
  const auto& [gx, gw] = rule;
  const auto nx = static_cast<std::size_t>(std::max(1.0, std::ceil((hi.x - lo.x) / panel)));
  const auto ny = static_cast<std::size_t>(std::max(1.0, std::ceil((hi.y - lo.y) / panel)));
  const double px = (hi.x - lo.x) / nx, py = (hi.y - lo.y) / ny;
  double total = 0.0;
  for (std::size_t a = 0; a < nx; ++a)
    for (std::size_t b = 0; b < ny; ++b) {
      const double cx = lo.x + (a + 0.5) * px, cy = lo.y + (b + 0.5) * py;
      double s = 0.0;
      for (std::size_t i = 0; i < gx.size(); ++i)
        for (std::size_t j = 0; j < gx.size(); ++j)
          s += gw[i] * gw[j] * f(Point{cx + 0.5 * px * gx[i], cy + 0.5 * py * gx[j]});
      total += s * 0.25 * px * py;
    }
  return total;
}

}  // namespace detail

struct BoundaryFluxPoint {
  double h = 0.0;
  double value = 0.0;  // 2h * int_{Omega \ Omega_{1/h}} |u|
};

/// 2h * int over the frame Omega \ Omega_{1/h} of `magnitude`, for each h of an
/// increasing list. The frame is split into four strips integrated by panelled
/// Gauss-Legendre, so every sample point lies strictly inside the frame.
template <class F>
std::vector<BoundaryFluxPoint> boundary_flux_decay(const Domain& d, const F& magnitude,
                                                   const std::vector<double>& h_list) {
  std::vector<BoundaryFluxPoint> out;
  for (std::size_t k = 0; k < h_list.size(); ++k) {
    const double h = h_list[k];
    if (!(h > 0.0)) throw ParameterError("boundary_flux_decay: h must be positive");
    if (k > 0 && !(h > h_list[k - 1])) throw ParameterError("boundary_flux_decay: h list must be increasing");
    const double w = 1.0 / h;
    double integral = 0.0;
    if (2.0 * w >= std::min(d.width(), d.height())) {
      integral = detail::integrate_rect(magnitude, d.lo(), d.hi(), std::min(d.width(), d.height()) / 16.0);
    } else {
      const double panel = std::min(w, std::min(d.width(), d.height()) / 16.0);
      const Point lo = d.lo(), hi = d.hi();
      integral += detail::integrate_rect(magnitude, lo, {hi.x, lo.y + w}, panel);
      integral += detail::integrate_rect(magnitude, {lo.x, hi.y - w}, hi, panel);
      integral += detail::integrate_rect(magnitude, {lo.x, lo.y + w}, {lo.x + w, hi.y - w}, panel);
      integral += detail::integrate_rect(magnitude, {hi.x - w, lo.y + w}, {hi.x, hi.y - w}, panel);
    }
    out.push_back({h, 2.0 * h * integral});
  }
  return out;
}

inline std::vector<BoundaryFluxPoint> boundary_flux_decay(const VelocityField& u, const std::vector<double>& h_list,
                                                          double t = 0.0) {
  return boundary_flux_decay(u.domain(), [&](Point x) { return norm(u.evaluate(x, t)); }, h_list);
}

// ---------------------------------------------------------------------------
// Stability
// ---------------------------------------------------------------------------

/// Perturbation families u^n, rho0^n converging to u, rho0.
struct PerturbationFamily {
  enum class Kind {
    identity,      // u^n = u, rho0^n = rho0
    amplitude,     // psi^n = (1 + 1/n) psi
    initial_data,  // rho0^n = rho0 + (1/n) bump
  };
  Kind kind = Kind::amplitude;
  GaussianBlob bump{{0.4, 0.5}, 0.05, 1.0};

  std::string name() const {
    switch (kind) {
      case Kind::identity: return "identity";
      case Kind::amplitude: return "amplitude";
      case Kind::initial_data: return "initial_data";
    }
    return "";
  }

  static PerturbationFamily from_name(const std::string& s) {
    if (s == "identity") return {Kind::identity, {}};
    if (s == "amplitude") return {Kind::amplitude, {}};
    if (s == "initial_data") return {Kind::initial_data, {}};
    throw ParameterError("unknown perturbation family '" + s + "'");
  }

  VelocityField velocity(const VelocityField& u, int n) const {
    return kind == Kind::amplitude ? u.scaled(1.0 + 1.0 / n) : u;
  }

  Layer initial(const Layer& rho0, int n) const {
    if (kind != Kind::initial_data) return rho0;
    Layer out = rho0;
    const Grid& g = rho0.grid();
    for (std::size_t k = 0; k < g.num_nodes(); ++k) out[k] += bump(g.node(k)) / n;
    return out;
  }
};

/// Distances ||beta(rho_n) - beta(rho)||_{L^2((0,T) x Omega)} per beta and n.
struct RenormalizationReport {
  std::vector<std::string> betas;
  std::vector<int> n;
  std::vector<std::vector<double>> distance;  // [beta][n]
  std::vector<bool> decreasing;               // per beta, nonincreasing along n
};

struct StabilityReport {
  std::string family;
  double p = 2.0;
  std::vector<int> n;
  std::vector<double> d;               // ||u^n - u||_{L^1(0,T; L^1)}
  std::vector<double> e;               // max_j ||rho^n(t_j) - rho(t_j)||_p
  std::vector<double> initial_distance;  // ||rho0^n - rho0||_p
  bool monotone = false;               // e nonincreasing within the 5% allowance
  bool strictly_decreasing = false;
  double ratio = 0.0;                  // e_last / e_first
  double d_slope = 0.0;                // least-squares slope of log d against log n
  RenormalizationReport renormalization;
};

/// Least-squares slope of log y against log x over entries with y > 0.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) continue;
    const double a = std::log(x[k]), b = std::log(y[k]);
    sx += a, sy += b, sxx += a * a, sxy += a * b;
    ++m;
  }
  if (m < 2) return 0.0;
  const double den = m * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (m * sxy - sx * sy) / den;
}

namespace detail {

inline double lp_distance(const Layer& a, const Layer& b, double p) {
  std::vector<double> diff(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) diff[k] = a[k] - b[k];
  return lp_norm(diff, a.grid(), p, a.grid().domain());
}

inline double squared_beta_distance(const Layer& a, const Layer& b, const AdmissibleBeta& beta,
                                    const QuadratureWeights& w) {
  const Grid& g = a.grid();
  double s = 0.0;
  for (std::size_t j = 0; j <= g.ny(); ++j)
    for (std::size_t i = 0; i <= g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      const double d = a[k] == b[k] ? 0.0 : beta(a[k]) - beta(b[k]);
      s += w(i, j) * d * d;
    }
  return s;
}

inline bool nonincreasing(const std::vector<double>& v, double allowance) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[k - 1] * (1.0 + allowance)) return false;
  return true;
}

}  // namespace detail

/// Solves the reference problem and every perturbed problem of the family
/// classically, advancing all of them in lockstep so no history is stored.
inline StabilityReport stability_experiment(const VelocityField& u, const Layer& rho0, const TimePartition& times,
                                            const PerturbationFamily& family, const std::vector<int>& n_list,
                                            double p, const std::vector<AdmissibleBeta>& betas = {},
                                            const SolveOptions& options = {}) {
  if (n_list.empty()) throw ParameterError("stability_experiment: empty n list");
  for (int n : n_list)
    if (n < 1) throw ParameterError("stability_experiment: n must be at least 1");
  if (!(p >= 1.0)) throw ParameterError("stability_experiment: p must lie in [1, inf]");
  const Grid& grid = rho0.grid();

  StabilityReport rep;
  rep.family = family.name();
  rep.p = p;
  rep.n = n_list;

  // Each perturbed solve runs single-threaded; the solves themselves are spread over workers.
  SolveOptions inner = options;
  inner.threads = 1;
  std::vector<std::unique_ptr<ClassicalSolver>> solvers;
  solvers.push_back(std::make_unique<ClassicalSolver>(rho0, u, times, inner));
  for (int n : n_list) {
    const VelocityField un = family.velocity(u, n);
    if (un.support_margin() < grid.min_spacing())
      throw SupportError("stability_experiment: perturbed field violates the support margin");
    VelocityField diff = un;
    for (const auto& s : u.components()) {
      StreamFunction neg = s;
      neg.amplitude = -s.amplitude;
      diff.add(neg);
    }
    rep.d.push_back(bochner_norm_u(diff, times, 1.0, false, grid));
    const Layer r0n = family.initial(rho0, n);
    rep.initial_distance.push_back(detail::lp_distance(r0n, rho0, p));
    solvers.push_back(std::make_unique<ClassicalSolver>(r0n, un, times, inner));
  }

  const std::size_t nn = n_list.size();
  const QuadratureWeights w = quadrature_weights(grid);
  rep.e.assign(nn, 0.0);
  std::vector<std::vector<double>> beta_sq(betas.size(), std::vector<double>(nn, 0.0));
  auto measure = [&](std::size_t j) {
    const Layer& ref = solvers.front()->layer();
    parallel_for(nn, [&](std::size_t k) {
      const Layer& l = solvers[k + 1]->layer();
      rep.e[k] = std::max(rep.e[k], detail::lp_distance(l, ref, p));
      for (std::size_t b = 0; b < betas.size(); ++b)
        beta_sq[b][k] += times.weight(j) * detail::squared_beta_distance(l, ref, betas[b], w);
    }, options.threads);
  };
  measure(0);
  for (std::size_t j = 1; j <= times.steps(); ++j) {
    parallel_for(solvers.size(), [&](std::size_t k) { solvers[k]->advance(); }, options.threads);
    measure(j);
  }

  rep.monotone = detail::nonincreasing(rep.e, 0.05);
  rep.strictly_decreasing = true;
  for (std::size_t k = 1; k < nn; ++k)
    if (!(rep.e[k] < rep.e[k - 1])) rep.strictly_decreasing = false;
  rep.ratio = rep.e.front() > 0.0 ? rep.e.back() / rep.e.front() : 0.0;
  std::vector<double> nd(n_list.begin(), n_list.end());
  rep.d_slope = loglog_slope(nd, rep.d);

  auto& rr = rep.renormalization;
  rr.n = n_list;
  for (std::size_t b = 0; b < betas.size(); ++b) {
    rr.betas.push_back(betas[b].name);
    std::vector<double> dist;
    for (double s : beta_sq[b]) dist.push_back(std::sqrt(s));
    rr.decreasing.push_back(detail::nonincreasing(dist, 0.0));
    rr.distance.push_back(std::move(dist));
  }
  return rep;
}

/// ||beta(rho_n) - beta(rho)||_{L^2((0,T) x Omega)} for stored fields.
inline RenormalizationReport renormalization_convergence_check(const std::vector<ScalarField>& rho_n,
                                                               const ScalarField& rho,
                                                               const std::vector<AdmissibleBeta>& betas) {
  RenormalizationReport rep;
  const QuadratureWeights w = quadrature_weights(rho.grid());
  for (std::size_t k = 0; k < rho_n.size(); ++k) {
    if (!(rho_n[k].grid() == rho.grid()) || !(rho_n[k].times() == rho.times()) ||
        rho_n[k].num_layers() != rho.num_layers())
      throw ParameterError("renormalization_convergence_check: fields do not share a grid and partition");
    rep.n.push_back(static_cast<int>(k));
  }
  for (const auto& beta : betas) {
    rep.betas.push_back(beta.name);
    std::vector<double> dist;
    for (const auto& f : rho_n) {
      double s = 0.0;
      for (std::size_t j = 0; j < rho.num_layers(); ++j)
        s += rho.times().weight(j) * detail::squared_beta_distance(f.layer(j), rho.layer(j), beta, w);
      dist.push_back(std::sqrt(s));
    }
    rep.decreasing.push_back(detail::nonincreasing(dist, 0.0));
    rep.distance.push_back(std::move(dist));
  }
  return rep;
}

}  // namespace translab

#endif  // TRANSLAB_ANALYSIS_HPP
