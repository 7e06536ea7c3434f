#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "translab/analysis.hpp"
#include "translab/characteristics.hpp"

using namespace translab;

namespace {

const Domain kUnit = Domain::unit_square();
const GaussianBlob kBlob{{0.6, 0.5}, 0.08, 1.0};

VelocityField vortex(TimeModulation m = {}) {
  StreamFunction psi;
  psi.modulation = m;
  return from_stream_function(kUnit, psi);
}

}  // namespace

// --- lp_norm ---------------------------------------------------------------

TEST(LpNorm, Constant) {
  const Grid g(kUnit, 32, 32);
  EXPECT_NEAR(lp_norm(Layer::sample(g, [](Point) { return -1.7; }), 2.0), 1.7, 1e-14);
  EXPECT_EQ(lp_norm(Layer::sample(g, [](Point) { return -1.7; }), kInfinity), 1.7);
}

TEST(LpNorm, IndicatorOfLeftHalf) {
  const Grid g(kUnit, 256, 256);
  EXPECT_NEAR(lp_norm(Layer::sample(g, [](Point p) { return p.x < 0.5 ? 1.0 : 0.0; }), 1.0), 0.5, 1.0 / 256);
}

TEST(LpNorm, GaussianMatchesRefinedGrid) {
  const double a = lp_norm(Layer::sample(Grid(kUnit, 256, 256), kBlob), 3.0);
  const double b = lp_norm(Layer::sample(Grid(kUnit, 1024, 1024), kBlob), 3.0);
  EXPECT_NEAR(a, b, 1e-5 * b);
  // closed form for a Gaussian far from the boundary: (2 pi sigma^2 / 3)^(1/3)
  EXPECT_NEAR(b, std::cbrt(2.0 * std::numbers::pi * 0.0064 / 3.0), 1e-6);
}

TEST(LpNorm, RejectsExponentsBelowOne) {
  const Grid g(kUnit, 8, 8);
  EXPECT_THROW(lp_norm(Layer(g), 0.5), ParameterError);
  EXPECT_NO_THROW(lp_quasi_norm(Layer(g).values(), g, 0.5, kUnit));
}

TEST(LpNorm, MonotoneInTheField) {
  const Grid g(kUnit, 40, 40);
  const Layer s = Layer::sample(g, [](Point p) { return std::sin(5 * p.x) + 2 * p.y; });
  const Layer r = Layer::sample(g, [&](Point p) { return 0.6 * (std::sin(5 * p.x) + 2 * p.y) * std::cos(3 * p.y); });
  for (double p : {1.0, 1.5, 2.0, 3.0, kInfinity}) EXPECT_LE(lp_norm(r, p), lp_norm(s, p));
}

// --- bochner_norm_u --------------------------------------------------------

TEST(BochnerNorm, ZeroField) {
  EXPECT_EQ(bochner_norm_u(VelocityField(kUnit), TimePartition(1.0, 10), 2.0, true, Grid(kUnit, 16, 16)), 0.0);
}

TEST(BochnerNorm, AutonomousFieldIsTTimesTheSpatialNorm) {
  const Grid g(kUnit, 64, 64);
  const VelocityField u = vortex();
  const double spatial = bochner_norm_u(u, TimePartition(1.0, 1), 2.0, true, g);
  EXPECT_NEAR(bochner_norm_u(u, TimePartition(2.5, 7), 2.0, true, g), 2.5 * spatial, 1e-12);
}

TEST(BochnerNorm, LinearModulationGivesHalfTSquared) {
  const Grid g(kUnit, 64, 64);
  const double spatial = bochner_norm_u(vortex(), TimePartition(1.0, 1), 1.0, false, g);
  const double T = 1.6;
  EXPECT_NEAR(bochner_norm_u(vortex(TimeModulation::from_name("linear")), TimePartition(T, 40), 1.0, false, g),
              0.5 * T * T * spatial, 1e-6);
}

TEST(BochnerNorm, NonCommonModulationUsesPerNodeSpatialNorms) {
  const Grid g(kUnit, 48, 48);
  VelocityField u(kUnit);
  StreamFunction a;
  a.center = {0.3, 0.5};
  a.radius = 0.15;
  StreamFunction b = a;
  b.center = {0.7, 0.5};
  b.modulation = TimeModulation::from_name("linear");
  u.add(a).add(b);
  VelocityField ua(kUnit), ub(kUnit);
  ua.add(a);
  ub.add(b);
  // disjoint supports: the L^1 norms add
  const TimePartition t(1.0, 20);
  EXPECT_NEAR(bochner_norm_u(u, t, 1.0, false, g), bochner_norm_u(ua, t, 1.0, false, g) + bochner_norm_u(ub, t, 1.0, false, g),
              1e-12);
}

// --- conservation_report ---------------------------------------------------

TEST(ConservationReport, ZeroVelocityHasZeroDrift) {
  const Grid g(kUnit, 64, 64);
  const ScalarField rho = solve_classical(Layer::sample(g, kBlob), VelocityField(kUnit), TimePartition(1.0, 10));
  for (const auto& r : conservation_report(rho, {1.0, 2.0, 3.0, kInfinity}, {1e-3, 1e-3, 1e-3, 1e-6})) {
    EXPECT_EQ(r.drift, 0.0);
    EXPECT_TRUE(r.pass());
  }
}

TEST(ConservationReport, VortexSolveConservesNormsForFiniteP) {
  const Grid g(kUnit, 128, 128);
  const ScalarField rho = solve_classical(Layer::sample(g, kBlob), vortex(), TimePartition(1.0, 200));
  const auto reports = conservation_report(rho, {1.0, 2.0, 3.0});
  for (const auto& r : reports) {
    EXPECT_LT(r.drift, 1e-2) << "p " << r.p;
    EXPECT_EQ(r.norms.size(), 201u);
  }
}

TEST(ConservationReport, DriftIsScaleInvariant) {
  const Grid g(kUnit, 64, 64);
  const Layer rho0 = Layer::sample(g, kBlob);
  Layer big = rho0;
  big *= 3.0;
  const TimePartition t(1.0, 20);
  const auto a = conservation_report(solve_classical(rho0, vortex(), t), {1.0, 2.0, kInfinity});
  const auto b = conservation_report(solve_classical(big, vortex(), t), {1.0, 2.0, kInfinity});
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_NEAR(b[k].reference, 3.0 * a[k].reference, 1e-14 * b[k].reference);
    EXPECT_NEAR(b[k].drift, a[k].drift, 1e-12);
  }
}

TEST(ConservationReport, FlagsNodesAboveTolerance) {
  const Grid g(kUnit, 16, 16);
  const ScalarField rho = solve_classical(Layer::sample(g, kBlob), vortex(), TimePartition(1.0, 50));
  const auto r = conservation_report(rho, {2.0}, {1e-6});
  EXPECT_FALSE(r.front().pass());
  EXPECT_FALSE(r.front().flagged.empty());
  EXPECT_THROW(conservation_report(rho, {0.5}), ParameterError);
}

// --- truncation_thresholds -------------------------------------------------

TEST(TruncationThresholds, BoundedFamilyHasNoTailAtItsBound) {
  const Grid g(kUnit, 32, 32);
  const Layer l = Layer::sample(g, [](Point p) { return 3.0 * std::sin(6 * p.x) * p.y; });
  const double B = lp_norm(l, kInfinity);
  EXPECT_EQ(tail_integral(l, B), 0.0);
  const auto prof = truncation_thresholds({l}, {1e-9, 0.1, 10.0});
  for (std::size_t k = 0; k < prof.eps.size(); ++k) {
    EXPECT_LE(prof.threshold[k], B);
    EXPECT_LT(prof.tail[k], prof.eps[k]);
  }
  EXPECT_EQ(prof.threshold.back(), 0.0);
}

TEST(TruncationThresholds, MatchesBruteForceScan) {
  const Grid g(kUnit, 48, 48);
  const Layer l = Layer::sample(g, kBlob);
  const QuadratureWeights w = quadrature_weights(g);
  std::set<double> levels{0.0};
  for (double v : l.values()) levels.insert(std::abs(v));
  for (double eps : {0.01, 0.001, 0.02}) {
    double best = -1.0;
    for (double m : levels) {
      double tail = 0.0;
      for (std::size_t j = 0; j <= g.ny(); ++j)
        for (std::size_t i = 0; i <= g.nx(); ++i)
          if (std::abs(l(i, j)) > m) tail += w(i, j) * std::abs(l(i, j));
      if (tail < eps) {
        best = m;
        break;
      }
    }
    EXPECT_EQ(truncation_thresholds({l}, {eps}).threshold.front(), best) << "eps " << eps;
  }
}

TEST(TruncationThresholds, UniformOverIdenticalCopies) {
  const Grid g(kUnit, 48, 48);
  const Layer l = Layer::sample(g, kBlob);
  const auto one = truncation_thresholds({l}, {0.01, 0.003});
  const auto many = truncation_thresholds({l, l, l, l}, {0.01, 0.003});
  EXPECT_EQ(one.threshold, many.threshold);
}

TEST(TruncationThresholds, TailsDecreaseInM) {
  const Grid g(kUnit, 48, 48);
  const Layer l = Layer::sample(g, kBlob);
  double prev = kInfinity;
  for (int k = 0; k <= 100; ++k) {
    const double t = tail_integral(l, k * 0.01);
    EXPECT_LE(t, prev);
    prev = t;
  }
}

// --- boundary_flux_decay ---------------------------------------------------

TEST(BoundaryFluxDecay, CompactSupportGivesExactZero) {
  const auto pts = boundary_flux_decay(vortex(), {4, 8, 16, 32, 64, 128, 256});
  EXPECT_GT(pts.front().value, 0.0);  // the frame of width 1/4 reaches the support
  for (std::size_t k = 1; k < pts.size(); ++k) {
    EXPECT_EQ(pts[k].value, 0.0) << "h " << pts[k].h;
    EXPECT_LE(pts[k].value, pts[k - 1].value);
  }
}

TEST(BoundaryFluxDecay, UnitFieldTendsToTwicePerimeter) {
  const auto pts = boundary_flux_decay(kUnit, [](Point) { return 1.0; }, {4, 16, 64, 256, 1024});
  for (const auto& p : pts) EXPECT_NEAR(p.value, 8.0 - 8.0 / p.h, 1e-9);
  EXPECT_NEAR(pts.back().value, 2.0 * kUnit.perimeter(), 0.02 * 2.0 * kUnit.perimeter());
}

TEST(BoundaryFluxDecay, HListMustIncrease) {
  EXPECT_THROW(boundary_flux_decay(vortex(), {8, 4}), ParameterError);
}

// --- stability -------------------------------------------------------------

TEST(Stability, IdentityFamilyGivesZero) {
  const Grid g(kUnit, 48, 48);
  const auto rep = stability_experiment(vortex(), Layer::sample(g, kBlob), TimePartition(1.0, 40),
                                        PerturbationFamily::from_name("identity"), {2, 4, 8}, 2.0,
                                        {beta_smooth_approx(1.0, 10)});
  for (double e : rep.e) EXPECT_EQ(e, 0.0);
  for (double d : rep.d) EXPECT_EQ(d, 0.0);
  for (double d : rep.renormalization.distance.front()) EXPECT_EQ(d, 0.0);
}

TEST(Stability, AmplitudeFamilyVelocityDistanceIsInverseN) {
  const Grid g(kUnit, 48, 48);
  const auto rep = stability_experiment(vortex(), Layer::sample(g, kBlob), TimePartition(1.0, 40),
                                        PerturbationFamily::from_name("amplitude"), {2, 4, 8, 16}, 2.0);
  EXPECT_NEAR(rep.d_slope, -1.0, 1e-9);
  for (std::size_t k = 1; k < rep.d.size(); ++k) EXPECT_NEAR(rep.d[k - 1] / rep.d[k], 2.0, 1e-9);
  EXPECT_EQ(rep.e.size(), rep.n.size());
  for (double e : rep.e) EXPECT_GE(e, 0.0);
}

TEST(Stability, InitialDataFamilyIsBoundedByTheInitialDistance) {
  const Grid g(kUnit, 96, 96);
  const auto rep = stability_experiment(vortex(), Layer::sample(g, kBlob), TimePartition(1.0, 100),
                                        PerturbationFamily::from_name("initial_data"), {2, 4, 8, 16}, 2.0,
                                        {beta_smooth_approx(1.0, 10)});
  for (std::size_t k = 0; k < rep.e.size(); ++k) EXPECT_LE(rep.e[k], rep.initial_distance[k] + 1e-9);
  EXPECT_TRUE(rep.strictly_decreasing);
  EXPECT_LT(rep.ratio, 0.5);
  EXPECT_TRUE(rep.renormalization.decreasing.front());
}

TEST(Stability, CoarseGridDoesNotManufactureInstability) {
  const auto run = [](std::size_t n) {
    const Grid g(kUnit, n, n);
    return stability_experiment(vortex(), Layer::sample(g, kBlob), TimePartition(1.0, 50),
                                PerturbationFamily::from_name("amplitude"), {4, 16}, 2.0);
  };
  const auto coarse = run(48), fine = run(96);
  for (std::size_t k = 0; k < coarse.e.size(); ++k) EXPECT_LE(coarse.e[k], fine.e[k] + 2e-3);
}

TEST(Stability, RejectsBadArguments) {
  const Grid g(kUnit, 16, 16);
  const Layer rho0 = Layer::sample(g, kBlob);
  const auto fam = PerturbationFamily::from_name("amplitude");
  EXPECT_THROW(stability_experiment(vortex(), rho0, TimePartition(1.0, 4), fam, {}, 2.0), ParameterError);
  EXPECT_THROW(stability_experiment(vortex(), rho0, TimePartition(1.0, 4), fam, {0}, 2.0), ParameterError);
  EXPECT_THROW(PerturbationFamily::from_name("nope"), ParameterError);
}

TEST(RenormalizationConvergence, IdenticalFieldsAndZeroBeta) {
  const Grid g(kUnit, 32, 32);
  const TimePartition t(1.0, 8);
  const ScalarField rho = solve_classical(Layer::sample(g, kBlob), vortex(), t);
  const auto rep = renormalization_convergence_check({rho, rho}, rho, {beta_smooth_approx(1.0, 10), beta_constant(0.0)});
  for (const auto& row : rep.distance)
    for (double d : row) EXPECT_EQ(d, 0.0);
  const ScalarField other = solve_classical(Layer::sample(g, kBlob), vortex().scaled(1.5), t);
  const auto zero = renormalization_convergence_check({other}, rho, {beta_constant(0.0)});
  EXPECT_EQ(zero.distance.front().front(), 0.0);
}

TEST(RenormalizationConvergence, AgreesWithStreamingComputation) {
  const Grid g(kUnit, 40, 40);
  const TimePartition t(1.0, 20);
  const Layer rho0 = Layer::sample(g, kBlob);
  const VelocityField u = vortex();
  const std::vector<int> ns{2, 8};
  const auto fam = PerturbationFamily::from_name("amplitude");
  const auto rep = stability_experiment(u, rho0, t, fam, ns, 2.0, {beta_smooth_approx(1.0, 10)});
  std::vector<ScalarField> fields;
  for (int n : ns) fields.push_back(solve_classical(fam.initial(rho0, n), fam.velocity(u, n), t));
  const auto stored = renormalization_convergence_check(fields, solve_classical(rho0, u, t), {beta_smooth_approx(1.0, 10)});
  for (std::size_t k = 0; k < ns.size(); ++k)
    EXPECT_NEAR(stored.distance[0][k], rep.renormalization.distance[0][k], 1e-14);
}
