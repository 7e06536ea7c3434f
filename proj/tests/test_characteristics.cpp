#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "translab/characteristics.hpp"
#include "translab/norms.hpp"

using namespace translab;

namespace {

const Domain kUnit = Domain::unit_square();

VelocityField vortex(double amplitude = 0.5) {
  StreamFunction psi;
  psi.amplitude = amplitude;
  return from_stream_function(kUnit, psi);
}

std::vector<Point> interior_probes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.05, 0.95);
  std::vector<Point> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back({U(rng), U(rng)});
  return out;
}

}  // namespace

TEST(FlowMap, ZeroFieldIsTheIdentity) {
  const VelocityField u(kUnit);
  for (Point x : interior_probes(10, 1)) EXPECT_EQ(flow_map(u, 0.0, 0.8, x, 0.01), x);
}

TEST(FlowMap, BoundaryPointsAreEquilibria) {
  const VelocityField u = vortex();
  for (Point x : {Point{0, 0.3}, Point{1, 0.5}, Point{0.25, 0}, Point{0.7, 1}, Point{1, 1}})
    EXPECT_EQ(flow_map(u, 0.0, 1.0, x, 0.01), x);
}

TEST(FlowMap, MatchesSelfRefinementReference) {
  const VelocityField u = vortex();
  const double h = 1.0 / 256, dt = 0.5 * h / u.peak_speed_unmodulated();
  const Point a = flow_map(u, 0.0, 1.0, {0.65, 0.5}, dt, h);
  const Point b = flow_map(u, 0.0, 1.0, {0.65, 0.5}, dt / 100, h);
  EXPECT_LT(norm(a - b), 1e-8);
  // the trajectory stays on its streamline: |x - c| is invariant for a radial stream function
  EXPECT_NEAR(norm(a - Point{0.5, 0.5}), 0.15, 1e-8);
}

TEST(FlowMap, GroupProperty) {
  const VelocityField u = vortex();
  for (Point x : interior_probes(20, 2)) {
    const Point direct = flow_map(u, 0.0, 1.0, x, 1e-3);
    const Point split = flow_map(u, 0.4037, 1.0, flow_map(u, 0.0, 0.4037, x, 1e-3), 1e-3);
    EXPECT_LT(norm(direct - split), 1e-10);
  }
}

TEST(FlowMap, ReversibilityConvergesAtFourthOrderOrBetter) {
  const VelocityField u = vortex();
  const auto probes = interior_probes(30, 3);
  auto worst = [&](double dt) {
    double w = 0.0;
    for (Point x : probes) w = std::max(w, norm(flow_map(u, 1.0, 0.0, flow_map(u, 0.0, 1.0, x, dt), dt) - x));
    return w;
  };
  const double e1 = worst(0.005), e2 = worst(0.0025);
  EXPECT_GE(std::log2(e1 / e2), 4.0);
}

TEST(FlowMap, ReversibilityWithinTenDtToTheFourthForASlowField) {
  const VelocityField u = vortex(0.05);
  for (double dt : {0.02, 0.01}) {
    for (Point x : interior_probes(30, 4)) {
      const Point back = flow_map(u, 1.0, 0.0, flow_map(u, 0.0, 1.0, x, dt), dt);
      EXPECT_LE(norm(back - x), 10.0 * std::pow(dt, 4)) << "dt " << dt;
    }
  }
}

TEST(FlowMap, StartOutsideTheDomainIsAnError) {
  EXPECT_THROW(flow_map(vortex(), 0.0, 1.0, {1.2, 0.5}, 0.01), DomainError);
}

TEST(FlowMap, SmallExitsAreClampedLargeExitsAreErrors) {
  const Domain d = kUnit;
  EXPECT_EQ(FlowMapIntegrator::keep_inside(d, {1.0 + 1e-3, 0.5}, 1.0 / 256), (Point{1.0, 0.5}));
  EXPECT_THROW(FlowMapIntegrator::keep_inside(d, {1.0 + 1e-2, 0.5}, 1.0 / 256), IntegrationError);
  // a fast field integrated with an absurd step throws rather than silently clamping
  StreamFunction psi;
  psi.radius = 0.45;
  psi.amplitude = 20.0;
  const VelocityField fast = from_stream_function(kUnit, psi);
  EXPECT_THROW(flow_map(fast, 0.0, 1.0, {0.5, 0.9}, 0.5, 1.0 / 256), IntegrationError);
}

TEST(CharacteristicFoot, InvertsTheForwardFlowOfMinusU) {
  const VelocityField u = vortex();
  const VelocityField minus_u = u.scaled(-1.0);
  for (Point x : interior_probes(10, 5)) {
    const Point foot = characteristic_foot(u, 0.7, x, 1e-4);
    EXPECT_LT(norm(flow_map(minus_u, 0.0, 0.7, foot, 1e-4) - x), 1e-10);
  }
}

TEST(SolveClassical, ConstantsAreTransported) {
  const Grid g(kUnit, 64, 64);
  const ScalarField rho = solve_classical(Layer::sample(g, [](Point) { return 0.3; }), vortex(), TimePartition(1.0, 20));
  for (std::size_t j = 0; j < rho.num_layers(); ++j)
    for (double v : rho.layer(j).values()) ASSERT_EQ(v, 0.3);
}

TEST(SolveClassical, CenteredRadialDensityIsStationaryUpToInterpolation) {
  const double sigma = 0.08;
  const Grid g(kUnit, 256, 256);
  const Layer rho0 = Layer::sample(g, GaussianBlob{{0.5, 0.5}, sigma, 1.0});
  double worst = 0.0;
  solve_classical_stream(rho0, vortex(), TimePartition(1.0, 50), [&](std::size_t, const Layer& l) {
    for (std::size_t k = 0; k < l.size(); ++k) worst = std::max(worst, std::abs(l[k] - rho0[k]));
  });
  // bilinear interpolation error bound h^2/8 (sup|f_xx| + sup|f_yy|), with sup|f_xx| = 1/sigma^2
  const double h = g.hx();
  EXPECT_LE(worst, h * h / 8.0 * 2.0 / (sigma * sigma));
}

TEST(SolveClassical, AgreesWithFinerReference) {
  const VelocityField u = vortex();
  const GaussianBlob blob{{0.6, 0.5}, 0.08, 1.0};
  const Grid coarse(kUnit, 64, 64), fine(kUnit, 256, 256);
  const ScalarField c = solve_classical(Layer::sample(coarse, blob), u, TimePartition(1.0, 100));
  Layer last(fine);
  solve_classical_stream(Layer::sample(fine, blob), u, TimePartition(1.0, 1000), [&](std::size_t j, const Layer& l) {
    if (j == 1000) last = l;
  });
  Layer diff(coarse);
  for (std::size_t j = 0; j <= 64; ++j)
    for (std::size_t i = 0; i <= 64; ++i) diff(i, j) = c.layer(100)(i, j) - last(4 * i, 4 * j);
  EXPECT_LT(lp_norm(diff, 2.0), 1e-3);
}

TEST(SolveClassical, MaxPrinciple) {
  const Grid g(kUnit, 96, 96);
  const Layer rho0 = Layer::sample(g, [](Point p) { return std::sin(7 * p.x) * std::cos(5 * p.y) + p.x; });
  const auto [lo, hi] = std::minmax_element(rho0.values().begin(), rho0.values().end());
  solve_classical_stream(rho0, vortex(), TimePartition(1.0, 30), [&](std::size_t, const Layer& l) {
    for (double v : l.values()) {
      ASSERT_GE(v, *lo);
      ASSERT_LE(v, *hi);
    }
  });
}

TEST(SolveClassical, LayersMatchCharacteristicFeet) {
  const VelocityField u = vortex();
  const Grid g(kUnit, 64, 64);
  const GaussianBlob blob{{0.6, 0.5}, 0.08, 1.0};
  const Layer rho0 = Layer::sample(g, blob);
  const TimePartition times(1.0, 10);
  const ScalarField rho = solve_classical(rho0, u, times);
  for (std::size_t k = 0; k < g.num_nodes(); k += 97) {
    const Point x = g.node(k);
    EXPECT_NEAR(rho.layer(10)[k], rho0.at(characteristic_foot(u, 1.0, x, 1e-4, g.hx())), 1e-6);
  }
}

TEST(SolveClassical, NonCommonModulationFallbackAgrees) {
  // two components with different time factors take the per-layer backward trace
  VelocityField u(kUnit);
  StreamFunction a;
  a.center = {0.35, 0.5};
  a.radius = 0.2;
  StreamFunction b = a;
  b.center = {0.7, 0.5};
  b.modulation = TimeModulation::from_name("linear");
  u.add(a).add(b);
  const Grid g(kUnit, 48, 48);
  const Layer rho0 = Layer::sample(g, GaussianBlob{{0.5, 0.5}, 0.1, 1.0});
  const ScalarField rho = solve_classical(rho0, u, TimePartition(1.0, 5), SolveOptions{0.05, 0});
  for (std::size_t k = 0; k < g.num_nodes(); k += 53)
    EXPECT_NEAR(rho.layer(5)[k], rho0.at(characteristic_foot(u, 1.0, g.node(k), 1e-4, g.hx())), 1e-6);
}

TEST(SolveClassical, RejectsMismatchedDomains) {
  const Grid g(Domain({0, 0}, {2, 1}), 8, 4);
  EXPECT_THROW(solve_classical(Layer(g), vortex(), TimePartition(1.0, 2)), ParameterError);
}

TEST(SliceIdentity, ZeroVelocity) {
  const Grid g(kUnit, 64, 64);
  const TimePartition t(1.0, 10);
  const Layer rho0 = Layer::sample(g, GaussianBlob{});
  const ScalarField rho = solve_classical(rho0, VelocityField(kUnit), t);
  EXPECT_LT(slice_identity_residual(rho, rho0, VelocityField(kUnit), SpatialBump{{0.5, 0.5}, 0.2, 1.0}, 5), 1e-14);
}

TEST(SliceIdentity, ClassicalSolutionAndRefinement) {
  const VelocityField u = vortex();
  const SpatialBump phi{{0.6, 0.6}, 0.15, 1.0};
  std::vector<double> r;
  for (std::size_t n : {128u, 256u}) {
    const Grid g(kUnit, n, n);
    const TimePartition t(1.0, n == 128 ? 500 : 1000);
    const Layer rho0 = Layer::sample(g, GaussianBlob{{0.6, 0.5}, 0.08, 1.0});
    r.push_back(slice_identity_residual(solve_classical(rho0, u, t), rho0, u, phi, t.steps() / 2));
  }
  EXPECT_LT(r[1], 1e-3);
  EXPECT_LT(r[1], r[0]);
}

TEST(SliceIdentity, FrozenDensityIsDetected) {
  const VelocityField u = vortex();
  const Grid g(kUnit, 128, 128);
  const TimePartition t(1.0, 100);
  const Layer rho0 = Layer::sample(g, GaussianBlob{{0.6, 0.5}, 0.08, 1.0});
  const double r = slice_identity_residual(ScalarField::frozen(rho0, t), rho0, u, SpatialBump{{0.6, 0.6}, 0.15, 1.0}, 50);
  EXPECT_GT(r, 1e-2);
  EXPECT_NEAR(r, 8.16e-2, 1e-3);
}
