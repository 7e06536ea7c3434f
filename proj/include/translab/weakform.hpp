#ifndef TRANSLAB_WEAKFORM_HPP
#define TRANSLAB_WEAKFORM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "translab/error.hpp"
#include "translab/fields.hpp"
#include "translab/geometry.hpp"
#include "translab/norms.hpp"
#include "translab/parallel.hpp"
#include "translab/spatial_probe.hpp"

namespace translab {

// ---------------------------------------------------------------------------
// Weak and renormalized residuals
// ---------------------------------------------------------------------------

/// Signed terms of
///   -int int rho phi_t  -  int rho0 phi(0)  +  int int rho (u . grad phi)
/// for one test function and one nonlinearity (empty name = identity).
struct ResidualReport {
  std::string test_id;
  std::string beta = "identity";
  double term_time = 0.0;
  double term_initial = 0.0;
  double term_advective = 0.0;
  double residual = 0.0;
  std::size_t nx = 0, ny = 0, nt = 0;
};

/// Streaming evaluator of weak residuals for a bank of test functions and
/// nonlinearities. Feed rho0 once and then every layer of rho, in any order;
/// time integrals use the trapezoid rule on the partition nodes.
class ResidualBank {
 public:
  ResidualBank(const Grid& grid, const TimePartition& times, const VelocityField& u,
               std::vector<TestFunction> tests, std::vector<std::optional<AdmissibleBeta>> betas = {std::nullopt})
      : grid_(grid), times_(times), tests_(std::move(tests)), betas_(std::move(betas)) {
    if (betas_.empty()) throw ParameterError("ResidualBank: empty nonlinearity list");
    for (const auto& phi : tests_) {
      check_test_support(phi, grid.domain(), times.final_time());
      std::size_t found = probes_.size();
      for (std::size_t k = 0; k < probes_.size(); ++k) {
        const SpatialBump& b = probes_[k]->bump();
        if (b.center == phi.space.center && b.radius == phi.space.radius && b.amplitude == phi.space.amplitude)
          found = k;
      }
      if (found == probes_.size()) probes_.push_back(std::make_unique<SpatialProbe>(grid, phi.space, u));
      probe_of_.push_back(found);
    }
    terms_.assign(tests_.size() * betas_.size(), Terms{});
  }

  const std::vector<TestFunction>& tests() const { return tests_; }

  void add_initial(const Layer& rho0) {
    check(rho0);
    for_each([&](std::size_t t, std::size_t b, const auto& map) {
      const double m = probes_[probe_of_[t]]->mass(rho0.values(), map);
      at(t, b).initial -= tests_[t].time.value(0.0) * m;
    });
  }

  void add_layer(std::size_t j, const Layer& rho) {
    check(rho);
    if (j >= times_.num_nodes()) throw ParameterError("ResidualBank: time index out of range");
    const double t = times_.t(j), w = times_.weight(j);
    for_each([&](std::size_t k, std::size_t b, const auto& map) {
      const auto [m, f] = probes_[probe_of_[k]]->moments(rho.values(), t, map);
      Terms& terms = at(k, b);
      terms.time -= w * tests_[k].time.derivative(t) * m;
      terms.advective += w * tests_[k].time.value(t) * f;
    });
  }

  std::vector<ResidualReport> reports() const {
    std::vector<ResidualReport> out;
    for (std::size_t k = 0; k < tests_.size(); ++k)
      for (std::size_t b = 0; b < betas_.size(); ++b) {
        const Terms& terms = terms_[k * betas_.size() + b];
        out.push_back({tests_[k].id, betas_[b] ? betas_[b]->name : "identity", terms.time, terms.initial,
                       terms.advective, std::abs(terms.time + terms.initial + terms.advective), grid_.nx(),
                       grid_.ny(), times_.steps()});
      }
    return out;
  }

 private:
  struct Terms {
    double time = 0.0, initial = 0.0, advective = 0.0;
  };

  Terms& at(std::size_t k, std::size_t b) { return terms_[k * betas_.size() + b]; }

  void check(const Layer& l) const {
    if (!(l.grid() == grid_)) throw ParameterError("ResidualBank: layer grid mismatch");
  }

  template <class F>
  void for_each(F&& f) {
    for (std::size_t b = 0; b < betas_.size(); ++b) {
      if (!betas_[b]) {
        for (std::size_t k = 0; k < tests_.size(); ++k) f(k, b, nullptr);
        continue;
      }
      const auto& beta = betas_[b]->value;
      for (std::size_t k = 0; k < tests_.size(); ++k) f(k, b, beta);
    }
  }

  Grid grid_;
  TimePartition times_;
  std::vector<TestFunction> tests_;
  std::vector<std::optional<AdmissibleBeta>> betas_;
  std::vector<std::unique_ptr<SpatialProbe>> probes_;
  std::vector<std::size_t> probe_of_;
  std::vector<Terms> terms_;
};

namespace detail {

inline ResidualReport single_residual(const ScalarField& rho, const Layer& rho0, const VelocityField& u,
                                      const TestFunction& phi, std::optional<AdmissibleBeta> beta) {
  if (!rho.complete()) throw ParameterError("weak_residual: density has missing time layers");
  ResidualBank bank(rho.grid(), rho.times(), u, {phi}, {std::move(beta)});
  bank.add_initial(rho0);
  for (std::size_t j = 0; j < rho.num_layers(); ++j) bank.add_layer(j, rho.layer(j));
  return bank.reports().front();
}

}  // namespace detail

inline ResidualReport weak_residual(const ScalarField& rho, const Layer& rho0, const VelocityField& u,
                                    const TestFunction& phi) {
  return detail::single_residual(rho, rho0, u, phi, std::nullopt);
}

/// weak_residual of beta(rho) with initial datum beta(rho0).
inline ResidualReport renormalized_residual(const ScalarField& rho, const Layer& rho0, const VelocityField& u,
                                            const AdmissibleBeta& beta, const TestFunction& phi) {
  return detail::single_residual(rho, rho0, u, phi, beta);
}

// ---------------------------------------------------------------------------
// Mollification and the commutator remainder
// ---------------------------------------------------------------------------

/// Node offsets inside the open eps-ball with the kernel and its gradient
/// pre-multiplied by the cell area. The weights are rescaled so the discrete
/// kernel has unit mass on the lattice, which makes constants exact.
class KernelStencil {
 public:
  struct Tap {
    std::ptrdiff_t di, dj;
    double w;        // eta_eps(z) * hx * hy
    double gx, gy;   // (grad eta_eps)(-z) * hx * hy, z = y - x
  };

  KernelStencil(const Grid& grid, const Kernel& kernel) : eps_(kernel.eps()) {
    const double hx = grid.hx(), hy = grid.hy();
    const auto ri = static_cast<std::ptrdiff_t>(std::floor(eps_ / hx));
    const auto rj = static_cast<std::ptrdiff_t>(std::floor(eps_ / hy));
    if (ri < 1 || rj < 1) throw ParameterError("KernelStencil: eps is below the grid spacing");
    double mass = 0.0;
    for (std::ptrdiff_t dj = -rj; dj <= rj; ++dj)
      for (std::ptrdiff_t di = -ri; di <= ri; ++di) {
        const Vec2 z{static_cast<double>(di) * hx, static_cast<double>(dj) * hy};
        const double w = kernel(z) * hx * hy;
        if (w == 0.0) continue;
        const Vec2 g = kernel.gradient(-z) * (hx * hy);
        taps_.push_back({di, dj, w, g.x, g.y});
        mass += w;
      }
    if (taps_.empty() || !(mass > 0.0)) throw ParameterError("KernelStencil: eps is below the grid spacing");
    lattice_mass_ = mass;
    for (Tap& t : taps_) {
      t.w /= mass;
      t.gx /= mass;
      t.gy /= mass;
    }
  }

  double eps() const { return eps_; }
  /// Lattice sum of the unscaled kernel (1 up to quadrature error).
  double lattice_mass() const { return lattice_mass_; }
  const std::vector<Tap>& taps() const { return taps_; }

 private:
  double eps_;
  double lattice_mass_ = 1.0;
  std::vector<Tap> taps_;
};

/// Nodal values on `region` (a subset of Omega_eps); nodes outside hold 0.
struct MollifiedLayer {
  Layer layer;
  Domain region;
};

namespace detail {

struct NodeBox {
  std::size_t i0, i1, j0, j1;  // inclusive; empty when i0 > i1 or j0 > j1
  bool empty() const { return i0 > i1 || j0 > j1; }
};

// Index ranges of the nodes lying in the closed rectangle `r`.
inline NodeBox nodes_in(const Grid& g, const Domain& r) {
  const Domain& d = g.domain();
  auto lo = [](double a, double origin, double h) {
    return static_cast<std::ptrdiff_t>(std::ceil((a - origin) / h - 1e-9));
  };
  auto hi = [](double b, double origin, double h) {
    return static_cast<std::ptrdiff_t>(std::floor((b - origin) / h + 1e-9));
  };
  const std::ptrdiff_t nx = static_cast<std::ptrdiff_t>(g.nx()), ny = static_cast<std::ptrdiff_t>(g.ny());
  const std::ptrdiff_t i0 = std::max<std::ptrdiff_t>(0, lo(r.lo().x, d.lo().x, g.hx()));
  const std::ptrdiff_t i1 = std::min(nx, hi(r.hi().x, d.lo().x, g.hx()));
  const std::ptrdiff_t j0 = std::max<std::ptrdiff_t>(0, lo(r.lo().y, d.lo().y, g.hy()));
  const std::ptrdiff_t j1 = std::min(ny, hi(r.hi().y, d.lo().y, g.hy()));
  if (i0 > i1 || j0 > j1) return {1, 0, 1, 0};
  return {static_cast<std::size_t>(i0), static_cast<std::size_t>(i1), static_cast<std::size_t>(j0),
          static_cast<std::size_t>(j1)};
}

// Omega_eps, optionally cut down to `within` grown by one cell, so that every
// node whose hat function meets `within` carries a computed value.
inline Domain mollification_region(const Grid& grid, double eps, const std::optional<Domain>& within) {
  const Domain inner = shrink(grid.domain(), eps);
  if (!within) return inner;
  const Domain& w = *within;
  const Point lo{std::max(inner.lo().x, w.lo().x - grid.hx()), std::max(inner.lo().y, w.lo().y - grid.hy())};
  const Point hi{std::min(inner.hi().x, w.hi().x + grid.hx()), std::min(inner.hi().y, w.hi().y + grid.hy())};
  if (!(lo.x < hi.x) || !(lo.y < hi.y)) throw DomainError("mollification region does not meet Omega_eps");
  return Domain(lo, hi);
}

}  // namespace detail

/// rho_eps = rho * eta_eps at the nodes of Omega_eps (optionally intersected with `within`).
inline MollifiedLayer mollify_density(const Layer& rho, const KernelStencil& stencil,
                                      const std::optional<Domain>& within = std::nullopt, unsigned threads = 0) {
  const Grid& g = rho.grid();
  const Domain region = detail::mollification_region(g, stencil.eps(), within);
  Layer out(g);
  const auto box = detail::nodes_in(g, region);
  if (box.empty()) return {std::move(out), region};
  const auto stride = static_cast<std::ptrdiff_t>(g.nx() + 1);
  const auto& taps = stencil.taps();
  const auto src = rho.values();
  parallel_for(box.j1 - box.j0 + 1, [&](std::size_t r) {
    const std::size_t j = box.j0 + r;
    for (std::size_t i = box.i0; i <= box.i1; ++i) {
      const auto k = static_cast<std::ptrdiff_t>(g.index(i, j));
      double s = 0.0;
      for (const auto& t : taps) s += t.w * src[k + t.dj * stride + t.di];
      out[static_cast<std::size_t>(k)] = s;
    }
  }, threads);
  return {std::move(out), region};
}

inline MollifiedLayer mollify_density(const Layer& rho, const Kernel& kernel,
                                      const std::optional<Domain>& within = std::nullopt) {
  return mollify_density(rho, KernelStencil(rho.grid(), kernel), within);
}

inline MollifiedLayer mollify_density(const ScalarField& rho, const Kernel& kernel, std::size_t j) {
  return mollify_density(rho.layer(j), kernel);
}

/// r_eps(x) = int rho(y) (u(y) - u(x)) . (grad eta_eps)(x - y) dy at time t, on the
/// nodes of Omega_eps (optionally intersected with `within`). With this sign
/// (rho_eps)_t - u . grad rho_eps = r_eps for solutions of rho_t - u . grad rho = 0.
inline MollifiedLayer commutator_remainder(const Layer& rho, const VelocityField& u, double t,
                                           const KernelStencil& stencil,
                                           const std::optional<Domain>& within = std::nullopt,
                                           unsigned threads = 0) {
  const Grid& g = rho.grid();
  const Domain region = detail::mollification_region(g, stencil.eps(), within);
  Layer out(g);
  const auto box = detail::nodes_in(g, region);
  if (box.empty() || u.is_zero()) return {std::move(out), region};

  // rho u on every node the stencils can reach
  const std::size_t n = g.num_nodes();
  std::vector<double> ux(n, 0.0), uy(n, 0.0), fx(n, 0.0), fy(n, 0.0);
  const auto src = rho.values();
  const double reach = stencil.eps();
  std::vector<StreamFunction> near;
  for (const auto& s : u.components()) {
    StreamFunction wide = s;
    wide.radius += reach;
    near.push_back(wide);
  }
  auto touches = [&](Point x) {
    return std::any_of(near.begin(), near.end(), [&](const StreamFunction& s) { return s.in_support(x); });
  };
  parallel_for(g.ny() + 1, [&](std::size_t j) {
    for (std::size_t i = 0; i <= g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      const Point x = g.node(i, j);
      if (!u.in_support(x)) continue;
      const Vec2 v = u.evaluate(x, t);
      ux[k] = v.x;
      uy[k] = v.y;
      fx[k] = src[k] * v.x;
      fy[k] = src[k] * v.y;
    }
  }, threads);

  const auto stride = static_cast<std::ptrdiff_t>(g.nx() + 1);
  const auto& taps = stencil.taps();
  parallel_for(box.j1 - box.j0 + 1, [&](std::size_t r) {
    const std::size_t j = box.j0 + r;
    for (std::size_t i = box.i0; i <= box.i1; ++i) {
      if (!touches(g.node(i, j))) continue;
      const auto k = static_cast<std::ptrdiff_t>(g.index(i, j));
      double flux = 0.0, grx = 0.0, gry = 0.0;
      for (const auto& tp : taps) {
        const std::ptrdiff_t m = k + tp.dj * stride + tp.di;
        flux += tp.gx * fx[m] + tp.gy * fy[m];
        grx += tp.gx * src[m];
        gry += tp.gy * src[m];
      }
      const auto kk = static_cast<std::size_t>(k);
      out[kk] = flux - (ux[kk] * grx + uy[kk] * gry);
    }
  }, threads);
  return {std::move(out), region};
}

inline MollifiedLayer commutator_remainder(const ScalarField& rho, const VelocityField& u, const Kernel& kernel,
                                           std::size_t j) {
  return commutator_remainder(rho.layer(j), u, rho.times().t(j), KernelStencil(rho.grid(), kernel));
}

// ---------------------------------------------------------------------------
// Remainder decay
// ---------------------------------------------------------------------------

struct RemainderPoint {
  double eps = 0.0;
  double norm = 0.0;  // ||r_eps||_{L^1(0,T; L^gamma(inner))}
};

/// Comparison of the weak residual of rho_eps against int int r_eps phi.
struct CommutatorIdentity {
  double eps = 0.0;
  std::string test_id;
  double residual_of_mollified = 0.0;  // signed weak residual of rho_eps
  double remainder_pairing = 0.0;      // int_0^T int r_eps phi
  double difference() const { return std::abs(residual_of_mollified - remainder_pairing); }
};

struct RemainderCurve {
  std::vector<RemainderPoint> points;
  double alpha = 0.0;
  double p = 0.0;
  double gamma = 0.0;
  Domain inner = Domain::unit_square();
  double margin = 0.0;  // dist(inner, boundary)
  bool hypothesis_satisfied = false;  // alpha >= q, q the conjugate of p
  bool decreasing = false;            // strictly decreasing along the sweep
  double velocity_w1alpha = 0.0;      // ||u||_{L^1(0,T; W^{1,alpha})} on the study grid
  std::vector<CommutatorIdentity> identity;

  double ratio_last_first() const {
    if (points.empty() || points.front().norm == 0.0) return 0.0;
    return points.back().norm / points.front().norm;
  }
};

/// 1/gamma = 1/alpha + 1/p (p = inf allowed).
inline double remainder_exponent(double alpha, double p) {
  if (!(alpha >= 1.0)) throw ParameterError("alpha must be at least 1");
  if (!(p > 1.0)) throw ParameterError("p must exceed 1");
  return 1.0 / (1.0 / alpha + (std::isinf(p) ? 0.0 : 1.0 / p));
}

inline double conjugate_exponent(double p) {
  if (std::isinf(p)) return 1.0;
  if (!(p > 1.0)) throw ParameterError("p must exceed 1");
  return p / (p - 1.0);
}

/// Streaming form of remainder_decay_study: add every layer of rho (with its
/// node index) and read the curve at the end. Test functions passed here must
/// be supported in `inner`; for each of them and each eps the commutator
/// identity is accumulated as well.
class RemainderAccumulator {
 public:
  RemainderAccumulator(const Grid& grid, const TimePartition& times, const VelocityField& u,
                       std::vector<double> eps_list, double alpha, double p, const Domain& inner,
                       std::vector<TestFunction> identity_tests = {}, unsigned threads = 0)
      : grid_(grid), times_(times), u_(u), threads_(threads) {
    if (eps_list.empty()) throw ParameterError("remainder_decay_study: empty eps list");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
      if (!(eps_list[k] > 0.0)) throw ParameterError("remainder_decay_study: eps must be positive");
      if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
        throw ParameterError("remainder_decay_study: eps list must be strictly decreasing");
    }
    const Domain& d = grid.domain();
    const double margin = std::min({inner.lo().x - d.lo().x, d.hi().x - inner.hi().x, inner.lo().y - d.lo().y,
                                    d.hi().y - inner.hi().y});
    if (!(margin > eps_list.front()))
      throw DomainError("remainder_decay_study: inner region margin " + format_short(margin) +
                        " does not exceed the largest eps " + format_short(eps_list.front()));
    curve_.alpha = alpha;
    curve_.p = p;
    curve_.gamma = remainder_exponent(alpha, p);
    curve_.inner = inner;
    curve_.margin = margin;
    curve_.hypothesis_satisfied = alpha >= conjugate_exponent(p);
    curve_.velocity_w1alpha = bochner_norm_u(u, times, alpha, true, grid);

    for (const auto& phi : identity_tests) {
      const Domain box = phi.space.bounding_box();
      if (!inner.contains(box.lo()) || !inner.contains(box.hi()))
        throw SupportError("commutator identity: test function support leaves the inner region");
    }
    for (double eps : eps_list) {
      Sweep s{eps, KernelStencil(grid, make_kernel(eps)), 0.0, nullptr, {}, {}};
      if (!identity_tests.empty()) {
        s.bank = std::make_unique<ResidualBank>(grid, times, u, identity_tests);
        for (const auto& phi : identity_tests) s.probes.emplace_back(grid, phi.space, u);
        s.pairing.assign(identity_tests.size(), 0.0);
      }
      sweeps_.push_back(std::move(s));
    }
    tests_ = std::move(identity_tests);
    if (!tests_.empty()) {
      double lx = kInfinity, ly = kInfinity, hx = -kInfinity, hy = -kInfinity;
      for (const auto& phi : tests_) {
        const Domain b = phi.space.bounding_box();
        lx = std::min(lx, b.lo().x), ly = std::min(ly, b.lo().y);
        hx = std::max(hx, b.hi().x), hy = std::max(hy, b.hi().y);
      }
      test_box_ = Domain({lx, ly}, {hx, hy});
    }
  }

  void add_layer(std::size_t j, const Layer& rho) {
    if (j >= times_.num_nodes()) throw ParameterError("remainder_decay_study: time index out of range");
    const double t = times_.t(j), w = times_.weight(j);
    for (Sweep& s : sweeps_) {
      const MollifiedLayer r = commutator_remainder(rho, u_, t, s.stencil, curve_.inner, threads_);
      s.total += w * lp_quasi_norm(r.layer.values(), grid_, curve_.gamma, curve_.inner);
      if (!s.bank) continue;
      const MollifiedLayer m = mollify_density(rho, s.stencil, *test_box_, threads_);
      if (j == 0) s.bank->add_initial(m.layer);
      s.bank->add_layer(j, m.layer);
      for (std::size_t k = 0; k < tests_.size(); ++k)
        s.pairing[k] += w * tests_[k].time.value(t) * s.probes[k].mass(r.layer.values());
    }
  }

  RemainderCurve result() const {
    RemainderCurve c = curve_;
    c.points.clear();
    c.identity.clear();
    for (const Sweep& s : sweeps_) {
      c.points.push_back({s.eps, s.total});
      if (!s.bank) continue;
      const auto reports = s.bank->reports();
      for (std::size_t k = 0; k < tests_.size(); ++k) {
        const auto& rep = reports[k];
        c.identity.push_back({s.eps, rep.test_id, rep.term_time + rep.term_initial + rep.term_advective,
                              s.pairing[k]});
      }
    }
    c.decreasing = true;
    for (std::size_t k = 1; k < c.points.size(); ++k)
      if (!(c.points[k].norm < c.points[k - 1].norm)) c.decreasing = false;
    return c;
  }

 private:
  struct Sweep {
    double eps;
    KernelStencil stencil;
    double total;
    std::unique_ptr<ResidualBank> bank;
    std::vector<SpatialProbe> probes;
    std::vector<double> pairing;
  };

  Grid grid_;
  TimePartition times_;
  VelocityField u_;
  unsigned threads_;
  RemainderCurve curve_;
  std::vector<Sweep> sweeps_;
  std::vector<TestFunction> tests_;
  std::optional<Domain> test_box_;
};

/// ||r_eps||_{L^1(0,T; L^gamma(inner))} for each eps of a strictly decreasing list.
/// `decreasing` reports whether the curve decreases; it is not enforced, since a
/// zero field gives a flat curve of zeros.
inline RemainderCurve remainder_decay_study(const ScalarField& rho, const VelocityField& u,
                                            const std::vector<double>& eps_list, double alpha, double p,
                                            const Domain& inner) {
  if (!rho.complete()) throw ParameterError("remainder_decay_study: density has missing time layers");
  RemainderAccumulator acc(rho.grid(), rho.times(), u, eps_list, alpha, p, inner);
  for (std::size_t j = 0; j < rho.num_layers(); ++j) acc.add_layer(j, rho.layer(j));
  return acc.result();
}

}  // namespace translab

#endif  // TRANSLAB_WEAKFORM_HPP
