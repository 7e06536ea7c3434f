#ifndef TRANSLAB_STUDIES_HPP
#define TRANSLAB_STUDIES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "translab/analysis.hpp"
#include "translab/characteristics.hpp"
#include "translab/config.hpp"
#include "translab/fields.hpp"
#include "translab/format.hpp"
#include "translab/geometry.hpp"
#include "translab/io.hpp"
#include "translab/norms.hpp"
#include "translab/weakform.hpp"

namespace translab {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct Resolution {
  std::size_t nx = 256, ny = 256, nt = 1000;
};

struct StudyConfig {
  std::uint64_t seed = 20240601;
  unsigned threads = 0;

  Domain domain = Domain::unit_square();
  Resolution grid;
  double T = 1.0;
  double cfl = 0.5;

  bool zero_velocity = false;
  StreamFunction vortex{};
  GaussianBlob density{{0.6, 0.5}, 0.08, 1.0};

  // test-function bank: every center crossed with every time profile
  std::vector<Point> test_centers{{0.6, 0.5}, {0.45, 0.6}, {0.5, 0.35}};
  double test_radius = 0.12;
  std::vector<std::string> test_profiles{"quadratic", "step_down"};
  double step_t0 = 0.5;
  double step_width = 0.25;

  struct {
    Resolution res;
    std::vector<double> p{1.0, 2.0, 3.0, kInfinity};
    double tolerance = 1e-3;
    double tolerance_inf = 1e-6;
    double max_principle_tolerance = 1e-9;
    std::size_t probes = 100;
    double reversibility_tolerance = 1e-8;
  } conservation;

  struct {
    Resolution res{256, 256, 100};
    std::vector<double> eps{0.1, 0.05, 0.025};
    double alpha = 2.0;
    double p = 2.0;
    double inner_margin = 0.15;
    double ratio_max = 0.5;
    double identity_tolerance = 1e-3;
  } mollify;

  struct {
    Resolution res;
    double tolerance = 1e-3;
    bool frozen_probe = true;
    double detection_threshold = 1e-2;
  } renorm;

  struct {
    Resolution res;
    std::string family = "amplitude";
    std::vector<int> n{2, 4, 8, 16};
    double p = 2.0;
    double ratio_max = 0.35;
    double slope_target = -1.0;
    double slope_tolerance = 0.1;
    double monotone_allowance = 0.05;
    double linearity_tolerance = 1e-9;
    GaussianBlob bump{{0.4, 0.5}, 0.05, 1.0};
  } stability;

  struct {
    Resolution res{128, 128, 100};
    std::size_t dump_every = 25;
  } solve;

  std::string output_dir;

  /// Effective "section.key = value" pairs after defaults, for echoing.
  std::map<std::string, std::string> resolved;

  VelocityField velocity() const {
    VelocityField u(domain);
    if (!zero_velocity) u.add(vortex);
    return u;
  }

  std::vector<TestFunction> test_bank() const {
    std::vector<TestFunction> bank;
    for (const Point& c : test_centers)
      for (const auto& name : test_profiles) {
        const TimeProfile tp = name == "quadratic" ? TimeProfile::quadratic(T) : TimeProfile::step_down(step_t0, step_width);
        bank.push_back(make_test_function(domain, c, test_radius, tp, T));
      }
    return bank;
  }
};

namespace detail {

inline Resolution read_resolution(ConfigReader& r, const std::string& section, const Resolution& base) {
  Resolution out;
  out.nx = static_cast<std::size_t>(r.integer(section + ".nx", static_cast<std::int64_t>(base.nx), 2));
  out.ny = static_cast<std::size_t>(r.integer(section + ".ny", static_cast<std::int64_t>(base.ny), 2));
  out.nt = static_cast<std::size_t>(r.integer(section + ".nt", static_cast<std::int64_t>(base.nt), 1));
  return out;
}

inline Point read_point(ConfigReader& r, const std::string& key, Point fallback) {
  const auto pts = r.points(key, {fallback});
  if (pts.size() != 1) ConfigReader::fail(key, "expected a single point 'x y'");
  return pts.front();
}

}  // namespace detail

/// Builds and validates a StudyConfig. Errors name the offending key.
inline StudyConfig read_study_config(const ConfigText& text) {
  StudyConfig c;
  ConfigReader r(text);

  c.seed = r.unsigned_integer("study.seed", c.seed);
  c.threads = static_cast<unsigned>(r.integer("study.threads", 0, 0));

  const double x_lo = r.real("domain.x_lo", 0.0), y_lo = r.real("domain.y_lo", 0.0);
  const double x_hi = r.real("domain.x_hi", 1.0), y_hi = r.real("domain.y_hi", 1.0);
  if (!(x_lo < x_hi)) ConfigReader::fail("domain.x_hi", "must exceed domain.x_lo");
  if (!(y_lo < y_hi)) ConfigReader::fail("domain.y_hi", "must exceed domain.y_lo");
  c.domain = Domain({x_lo, y_lo}, {x_hi, y_hi});

  c.grid.nx = static_cast<std::size_t>(r.integer("grid.nx", 256, 2));
  c.grid.ny = static_cast<std::size_t>(r.integer("grid.ny", 256, 2));
  c.grid.nt = static_cast<std::size_t>(r.integer("time.nt", 1000, 1));
  c.T = r.positive("time.T", 1.0);
  c.cfl = r.positive("time.cfl", 0.5);

  c.zero_velocity = r.choice("velocity.kind", "vortex", {"vortex", "zero"}) == "zero";
  c.vortex.center = detail::read_point(r, "velocity.center", c.vortex.center);
  c.vortex.radius = r.positive("velocity.radius", c.vortex.radius);
  c.vortex.amplitude = r.real("velocity.amplitude", c.vortex.amplitude);
  c.vortex.modulation = TimeModulation::from_name(
      r.choice("velocity.modulation", "constant", {"constant", "linear", "inverse_sqrt"}));

  c.density.center = detail::read_point(r, "density.center", c.density.center);
  c.density.sigma = r.positive("density.sigma", c.density.sigma);
  c.density.amplitude = r.real("density.amplitude", c.density.amplitude);

  c.test_centers = r.points("tests.centers", c.test_centers);
  c.test_radius = r.positive("tests.radius", c.test_radius);
  {
    const std::string key = "tests.profiles";
    const std::string raw = r.text(key, "quadratic, step_down");
    c.test_profiles.clear();
    std::string cur;
    for (char ch : raw + ",") {
      if (ch == ',' || ch == ' ') {
        if (!cur.empty()) {
          if (cur != "quadratic" && cur != "step_down")
            ConfigReader::fail(key, "unknown profile '" + cur + "' (use quadratic or step_down)");
          c.test_profiles.push_back(cur);
        }
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (c.test_profiles.empty()) ConfigReader::fail(key, "list must not be empty");
  }
  c.step_t0 = r.positive("tests.step_t0", c.step_t0);
  c.step_width = r.positive("tests.step_width", c.step_width);
  if (!(c.step_t0 + c.step_width < c.T) || !(c.step_t0 - c.step_width >= 0.0))
    ConfigReader::fail("tests.step_width", "step window must lie inside [0, T)");

  auto& cs = c.conservation;
  cs.res = detail::read_resolution(r, "conservation", c.grid);
  cs.p = r.reals("conservation.p", cs.p);
  for (double p : cs.p)
    if (!(p >= 1.0)) ConfigReader::fail("conservation.p", "exponents must lie in [1, inf]");
  cs.tolerance = r.positive("conservation.tolerance", cs.tolerance);
  cs.tolerance_inf = r.positive("conservation.tolerance_inf", cs.tolerance_inf);
  cs.max_principle_tolerance = r.positive("conservation.max_principle_tolerance", cs.max_principle_tolerance);
  cs.probes = static_cast<std::size_t>(r.integer("conservation.probes", static_cast<std::int64_t>(cs.probes), 0));
  cs.reversibility_tolerance = r.positive("conservation.reversibility_tolerance", cs.reversibility_tolerance);

  auto& ms = c.mollify;
  ms.res = detail::read_resolution(r, "mollify", {c.grid.nx, c.grid.ny, ms.res.nt});
  ms.eps = r.reals("mollify.eps", ms.eps);
  for (std::size_t k = 0; k < ms.eps.size(); ++k) {
    if (!(ms.eps[k] > 0.0) || std::isinf(ms.eps[k])) ConfigReader::fail("mollify.eps", "entries must be positive");
    if (k > 0 && !(ms.eps[k] < ms.eps[k - 1])) ConfigReader::fail("mollify.eps", "list must be strictly decreasing");
  }
  ms.alpha = r.real("mollify.alpha", ms.alpha);
  if (!(ms.alpha >= 1.0)) ConfigReader::fail("mollify.alpha", "must be at least 1");
  ms.p = r.real("mollify.p", ms.p);
  if (!(ms.p > 1.0)) ConfigReader::fail("mollify.p", "must exceed 1");
  ms.inner_margin = r.positive("mollify.inner_margin", ms.inner_margin);
  if (!(ms.inner_margin > ms.eps.front()))
    ConfigReader::fail("mollify.inner_margin", "must exceed the largest eps");
  ms.ratio_max = r.positive("mollify.ratio_max", ms.ratio_max);
  ms.identity_tolerance = r.positive("mollify.identity_tolerance", ms.identity_tolerance);

  auto& rs = c.renorm;
  rs.res = detail::read_resolution(r, "renorm", c.grid);
  rs.tolerance = r.positive("renorm.tolerance", rs.tolerance);
  rs.frozen_probe = r.boolean("renorm.frozen_probe", rs.frozen_probe);
  rs.detection_threshold = r.positive("renorm.detection_threshold", rs.detection_threshold);

  auto& ss = c.stability;
  ss.res = detail::read_resolution(r, "stability", c.grid);
  ss.family = r.choice("stability.family", ss.family, {"identity", "amplitude", "initial_data"});
  ss.n = r.integers("stability.n", ss.n, 1);
  ss.p = r.real("stability.p", ss.p);
  if (!(ss.p >= 1.0)) ConfigReader::fail("stability.p", "must lie in [1, inf]");
  ss.ratio_max = r.positive("stability.ratio_max", ss.ratio_max);
  ss.slope_target = r.real("stability.slope_target", ss.slope_target);
  ss.slope_tolerance = r.positive("stability.slope_tolerance", ss.slope_tolerance);
  ss.monotone_allowance = r.non_negative("stability.monotone_allowance", ss.monotone_allowance);
  ss.linearity_tolerance = r.positive("stability.linearity_tolerance", ss.linearity_tolerance);
  ss.bump.center = detail::read_point(r, "stability.bump_center", ss.bump.center);
  ss.bump.sigma = r.positive("stability.bump_sigma", ss.bump.sigma);
  ss.bump.amplitude = r.real("stability.bump_amplitude", ss.bump.amplitude);

  c.solve.res = detail::read_resolution(r, "solve", c.solve.res);
  c.solve.dump_every = static_cast<std::size_t>(r.integer("solve.dump_every", 25, 1));

  c.output_dir = r.text("output.dir", "");

  r.finish();
  c.resolved = r.resolved();

  // Cross-field checks that need the assembled objects.
  try {
    (void)c.velocity();
  } catch (const Error& e) {
    ConfigReader::fail("velocity.radius", e.what());
  }
  try {
    (void)c.test_bank();
  } catch (const Error& e) {
    ConfigReader::fail("tests.centers", e.what());
  }
  return c;
}

inline StudyConfig load_study_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  ConfigText text = ConfigText::load(path);
  for (const auto& o : overrides) text.set(o);
  return read_study_config(text);
}

// ---------------------------------------------------------------------------
// Outcomes
// ---------------------------------------------------------------------------

/// One verified property: `value relation tolerance` must hold. `reference`
/// says where the bound comes from: "exact" when theory forces the value and
/// the tolerance only absorbs discretisation error, "pilot" when the bound
/// was fixed from a pilot run.
struct Check {
  std::string name;
  std::string invariant;
  double value = 0.0;
  std::string relation = "<";
  double tolerance = 0.0;
  std::string reference = "exact";
  bool pass = false;
};

inline Check make_check(std::string name, std::string invariant, double value, std::string relation,
                        double tolerance, std::string reference) {
  bool ok = false;
  if (relation == "<") ok = value < tolerance;
  else if (relation == "<=") ok = value <= tolerance;
  else if (relation == ">") ok = value > tolerance;
  else if (relation == "==") ok = value == tolerance;
  else throw ParameterError("make_check: unknown relation '" + relation + "'");
  return {std::move(name), std::move(invariant), value, std::move(relation), tolerance, std::move(reference), ok};
}

struct StudyOutcome {
  std::string study;
  std::vector<Check> checks;
  nlohmann::ordered_json flags = nlohmann::ordered_json::object();
  std::vector<std::string> files;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }

  const Check* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

namespace detail {

inline nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return format_exact(v);
}

inline void write_summary(const std::filesystem::path& dir, const StudyOutcome& out, const StudyConfig& cfg) {
  nlohmann::ordered_json j;
  j["study"] = out.study;
  j["pass"] = out.pass();
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& c : out.checks)
    checks.push_back({{"name", c.name},
                      {"invariant", c.invariant},
                      {"value", number(c.value)},
                      {"relation", c.relation},
                      {"tolerance", number(c.tolerance)},
                      {"reference", c.reference},
                      {"pass", c.pass}});
  j["checks"] = checks;
  j["flags"] = out.flags;
  j["files"] = out.files;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [k, v] : cfg.resolved) config[k] = v;
  j["config"] = config;
  std::ofstream f(dir / "summary.json");
  if (!f) throw Error("cannot write " + (dir / "summary.json").string());
  f << j.dump(2) << '\n';
}

inline void prepare(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

// Uniform double in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementation so probe points are portable.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline SolveOptions solve_options(const StudyConfig& c) { return {c.cfl, c.threads}; }

inline double successive_ratio_max(const std::vector<double>& v) {
  double m = 0.0;
  for (std::size_t k = 1; k < v.size(); ++k) m = std::max(m, v[k - 1] > 0.0 ? v[k] / v[k - 1] : kInfinity);
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Studies
// ---------------------------------------------------------------------------

/// Classical solve with norm conservation, max principle and flow-map reversibility.
inline StudyOutcome run_conservation_study(const StudyConfig& cfg, const std::filesystem::path& dir) {
  detail::prepare(dir);
  const auto& cs = cfg.conservation;
  const Grid grid(cfg.domain, cs.res.nx, cs.res.ny);
  const TimePartition times(cfg.T, cs.res.nt);
  const VelocityField u = cfg.velocity();
  const Layer rho0 = Layer::sample(grid, cfg.density);

  std::vector<double> tolerances;
  for (double p : cs.p) tolerances.push_back(std::isinf(p) ? cs.tolerance_inf : cs.tolerance);
  ConservationAccumulator acc(cs.p, tolerances);
  acc.set_reference(rho0);
  const auto [lo_it, hi_it] = std::minmax_element(rho0.values().begin(), rho0.values().end());
  const double lo0 = *lo_it, hi0 = *hi_it;
  double over = 0.0, under = 0.0;
  solve_classical_stream(rho0, u, times, [&](std::size_t j, const Layer& l) {
    acc.add_layer(j, times.t(j), l);
    const auto [a, b] = std::minmax_element(l.values().begin(), l.values().end());
    under = std::max(under, lo0 - *a);
    over = std::max(over, *b - hi0);
  }, detail::solve_options(cfg));

  StudyOutcome out;
  out.study = "conservation";
  {
    CsvWriter csv(dir / "conservation.csv", {"t", "p", "norm", "drift"});
    for (const auto& r : acc.reports())
      for (std::size_t j = 0; j < r.times.size(); ++j)
        csv.write(r.times[j], r.p, r.norms[j], detail::relative(r.norms[j], r.reference));
    out.files.push_back("conservation.csv");
  }
  for (const auto& r : acc.reports()) {
    const std::string tag = std::isinf(r.p) ? "inf" : format_short(r.p);
    out.checks.push_back(make_check("drift_p" + tag, "norm conservation ||rho(t)||_p = ||rho0||_p", r.drift, "<",
                                    r.tolerance, std::isinf(r.p) ? "pilot" : "exact"));
    out.flags["growth_p" + tag] = detail::number(r.growth);
  }
  out.checks.push_back(make_check("max_principle_upper", "max principle rho <= max rho0", std::max(0.0, over), "<=",
                                  cs.max_principle_tolerance, "exact"));
  out.checks.push_back(make_check("max_principle_lower", "max principle rho >= min rho0", std::max(0.0, under), "<=",
                                  cs.max_principle_tolerance, "exact"));

  if (cs.probes > 0) {
    // forward then backward flow over [0, T] from seeded interior points
    const double speed = u.peak_speed_bound(0.0, cfg.T);
    const double h = grid.min_spacing();
    const double dt = speed > 0.0 ? std::min(times.dt(), cfg.cfl * h / speed) : times.dt();
    std::mt19937_64 rng(cfg.seed);
    CsvWriter csv(dir / "flow_probes.csv", {"x", "y", "x_back", "y_back", "error"});
    double worst = 0.0;
    for (std::size_t k = 0; k < cs.probes; ++k) {
      const Point x{cfg.domain.lo().x + detail::unit_uniform(rng) * cfg.domain.width(),
                    cfg.domain.lo().y + detail::unit_uniform(rng) * cfg.domain.height()};
      const Point y = flow_map(u, 0.0, cfg.T, x, dt, h);
      const Point z = flow_map(u, cfg.T, 0.0, y, dt, h);
      const double e = norm(z - x);
      worst = std::max(worst, e);
      csv.write(x.x, x.y, z.x, z.y, e);
    }
    out.files.push_back("flow_probes.csv");
    out.checks.push_back(make_check("flow_reversibility", "flow map reversibility X(0; T, X(T; 0, x)) = x", worst,
                                    "<", cs.reversibility_tolerance, "pilot"));
  }
  out.flags["grid"] = {grid.nx(), grid.ny()};
  out.flags["nt"] = times.steps();
  out.flags["zero_velocity"] = u.is_zero();
  detail::write_summary(dir, out, cfg);
  return out;
}

/// Commutator remainder decay and the mollified-equation identity.
inline StudyOutcome run_mollification_study(const StudyConfig& cfg, const std::filesystem::path& dir) {
  detail::prepare(dir);
  const auto& ms = cfg.mollify;
  const Grid grid(cfg.domain, ms.res.nx, ms.res.ny);
  const TimePartition times(cfg.T, ms.res.nt);
  const VelocityField u = cfg.velocity();
  const Layer rho0 = Layer::sample(grid, cfg.density);
  const Domain inner = shrink(cfg.domain, ms.inner_margin);

  std::vector<TestFunction> tests;
  for (const auto& phi : cfg.test_bank()) {
    const Domain b = phi.space.bounding_box();
    if (inner.contains(b.lo()) && inner.contains(b.hi())) tests.push_back(phi);
  }
  RemainderAccumulator acc(grid, times, u, ms.eps, ms.alpha, ms.p, inner, tests, cfg.threads);
  solve_classical_stream(rho0, u, times, [&](std::size_t j, const Layer& l) { acc.add_layer(j, l); },
                         detail::solve_options(cfg));
  const RemainderCurve curve = acc.result();

  StudyOutcome out;
  out.study = "mollify";
  {
    CsvWriter csv(dir / "remainder.csv", {"eps", "norm", "gamma", "region_margin"});
    for (const auto& p : curve.points) csv.write(p.eps, p.norm, curve.gamma, curve.margin);
    out.files.push_back("remainder.csv");
  }
  {
    CsvWriter csv(dir / "identity.csv", {"eps", "test", "residual_of_mollified", "remainder_pairing", "difference"});
    for (const auto& i : curve.identity)
      csv.write(i.eps, "\"" + i.test_id + "\"", i.residual_of_mollified, i.remainder_pairing, i.difference());
    out.files.push_back("identity.csv");
  }

  std::vector<double> norms;
  for (const auto& p : curve.points) norms.push_back(p.norm);
  const double largest = *std::max_element(norms.begin(), norms.end());
  if (u.is_zero()) {
    out.checks.push_back(make_check("remainder_zero", "r_eps vanishes for u = 0", largest, "==", 0.0, "exact"));
  } else {
    out.checks.push_back(make_check("remainder_decreasing", "r_eps -> 0 in L^1(0,T; L^gamma(inner))",
                                    detail::successive_ratio_max(norms), "<", 1.0, "exact"));
    out.checks.push_back(make_check("remainder_ratio", "r_eps -> 0 in L^1(0,T; L^gamma(inner))",
                                    curve.ratio_last_first(), "<", ms.ratio_max, "pilot"));
  }
  if (!curve.identity.empty()) {
    double worst = 0.0;
    for (const auto& i : curve.identity) worst = std::max(worst, i.difference());
    out.checks.push_back(make_check("commutator_identity",
                                    "weak residual of rho_eps equals int int r_eps phi", worst, "<",
                                    ms.identity_tolerance, "exact"));
  }
  out.flags["gamma"] = curve.gamma;
  out.flags["hypothesis_alpha_ge_q"] = curve.hypothesis_satisfied ? "satisfied" : "not satisfied";
  out.flags["velocity_L1_W1alpha"] = curve.velocity_w1alpha;
  out.flags["identity_tests"] = tests.size();
  detail::write_summary(dir, out, cfg);
  return out;
}

/// Weak and renormalized residuals of the classical solution over a bank of
/// test functions and nonlinearities, plus a time-frozen negative control.
inline StudyOutcome run_renormalization_study(const StudyConfig& cfg, const std::filesystem::path& dir) {
  detail::prepare(dir);
  const auto& rs = cfg.renorm;
  const Grid grid(cfg.domain, rs.res.nx, rs.res.ny);
  const TimePartition times(cfg.T, rs.res.nt);
  const VelocityField u = cfg.velocity();
  const Layer rho0 = Layer::sample(grid, cfg.density);
  const auto tests = cfg.test_bank();

  const double range = std::max(std::abs(cfg.density.amplitude), 1.0);
  std::vector<std::optional<AdmissibleBeta>> betas{std::nullopt,
                                                    beta_smooth_approx(10.0 * range, 10),
                                                    beta_smooth_approx(1.0, 10),
                                                    beta_bounded_power(2.0, 4.0, 10),
                                                    beta_constant(0.7)};
  ResidualBank bank(grid, times, u, tests, betas);
  ResidualBank frozen(grid, times, u, tests);
  bank.add_initial(rho0);
  frozen.add_initial(rho0);
  solve_classical_stream(rho0, u, times, [&](std::size_t j, const Layer& l) {
    bank.add_layer(j, l);
    if (rs.frozen_probe) frozen.add_layer(j, rho0);
  }, detail::solve_options(cfg));

  const auto reports = bank.reports();
  StudyOutcome out;
  out.study = "renorm";
  {
    CsvWriter csv(dir / "residuals.csv",
                  {"test", "beta", "term_time", "term_initial", "term_advective", "residual", "nx", "ny", "nt"});
    for (const auto& r : reports)
      csv.write("\"" + r.test_id + "\"", "\"" + r.beta + "\"", r.term_time, r.term_initial, r.term_advective,
                r.residual, r.nx, r.ny, r.nt);
    out.files.push_back("residuals.csv");
  }

  const std::size_t nb = betas.size();
  for (std::size_t b = 0; b < nb; ++b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < tests.size(); ++k) worst = std::max(worst, reports[k * nb + b].residual);
    const std::string label = b == 0 ? "weak_residual" : "renormalized_residual[" + reports[b].beta + "]";
    out.checks.push_back(make_check(label, b == 0 ? "weak formulation" : "renormalization property", worst, "<",
                                    rs.tolerance, "exact"));
  }
  double clip_gap = 0.0;
  for (std::size_t k = 0; k < tests.size(); ++k)
    clip_gap = std::max(clip_gap, std::abs(reports[k * nb + 1].residual - reports[k * nb].residual));
  out.checks.push_back(make_check("identity_clip_matches_weak", "beta acting as identity on the range", clip_gap,
                                  "==", 0.0, "exact"));

  if (rs.frozen_probe) {
    double worst = 0.0;
    CsvWriter csv(dir / "frozen_residuals.csv", {"test", "residual"});
    for (const auto& r : frozen.reports()) {
      worst = std::max(worst, r.residual);
      csv.write("\"" + r.test_id + "\"", r.residual);
    }
    out.files.push_back("frozen_residuals.csv");
    out.checks.push_back(make_check("frozen_detected", "non-solutions leave a residual", worst, ">",
                                    rs.detection_threshold, "pilot"));
  }
  out.flags["tests"] = tests.size();
  out.flags["betas"] = nb;
  detail::write_summary(dir, out, cfg);
  return out;
}

/// Stability of the solution map under a perturbation family.
inline StudyOutcome run_stability_study(const StudyConfig& cfg, const std::filesystem::path& dir) {
  detail::prepare(dir);
  const auto& ss = cfg.stability;
  const Grid grid(cfg.domain, ss.res.nx, ss.res.ny);
  const TimePartition times(cfg.T, ss.res.nt);
  const VelocityField u = cfg.velocity();
  const Layer rho0 = Layer::sample(grid, cfg.density);
  PerturbationFamily family = PerturbationFamily::from_name(ss.family);
  family.bump = ss.bump;

  const StabilityReport rep = stability_experiment(u, rho0, times, family, ss.n, ss.p, {beta_smooth_approx(1.0, 10)},
                                                   detail::solve_options(cfg));
  StudyOutcome out;
  out.study = "stability";
  {
    CsvWriter csv(dir / "stability.csv", {"n", "d_n", "e_n", "initial_distance"});
    for (std::size_t k = 0; k < rep.n.size(); ++k) csv.write(rep.n[k], rep.d[k], rep.e[k], rep.initial_distance[k]);
    out.files.push_back("stability.csv");
  }
  {
    CsvWriter csv(dir / "renormalization.csv", {"beta", "n", "distance"});
    const auto& rr = rep.renormalization;
    for (std::size_t b = 0; b < rr.betas.size(); ++b)
      for (std::size_t k = 0; k < rr.n.size(); ++k) csv.write("\"" + rr.betas[b] + "\"", rr.n[k], rr.distance[b][k]);
    out.files.push_back("renormalization.csv");
  }

  const std::string inv = "stability in C([0,T]; L^p)";
  switch (family.kind) {
    case PerturbationFamily::Kind::identity: {
      const double worst = *std::max_element(rep.e.begin(), rep.e.end());
      out.checks.push_back(make_check("identity_family_zero", inv, worst, "==", 0.0, "exact"));
      break;
    }
    case PerturbationFamily::Kind::amplitude: {
      out.checks.push_back(make_check("d_slope", "||u^n - u||_{L^1 L^1} proportional to 1/n",
                                      std::abs(rep.d_slope - ss.slope_target), "<=", ss.slope_tolerance, "exact"));
      out.checks.push_back(make_check("e_strictly_decreasing", inv, detail::successive_ratio_max(rep.e), "<", 1.0,
                                      "pilot"));
      out.checks.push_back(make_check("e_monotone_within_allowance", inv, detail::successive_ratio_max(rep.e), "<=",
                                      1.0 + ss.monotone_allowance, "exact"));
      out.checks.push_back(make_check("e_halved", inv, rep.ratio, "<", 0.5, "pilot"));
      out.checks.push_back(make_check("e_ratio", inv, rep.ratio, "<", ss.ratio_max, "pilot"));
      const auto& rr = rep.renormalization;
      for (std::size_t b = 0; b < rr.betas.size(); ++b)
        out.checks.push_back(make_check("renormalized_convergence[" + rr.betas[b] + "]",
                                        "beta(rho_n) -> beta(rho) in L^2(0,T; L^2)",
                                        detail::successive_ratio_max(rr.distance[b]), "<=", 1.0, "pilot"));
      break;
    }
    case PerturbationFamily::Kind::initial_data: {
      double excess = 0.0;
      for (std::size_t k = 0; k < rep.e.size(); ++k) excess = std::max(excess, rep.e[k] - rep.initial_distance[k]);
      out.checks.push_back(make_check("linearity_bound", "e_n <= ||rho0^n - rho0||_p", excess, "<=",
                                      ss.linearity_tolerance, "exact"));
      out.checks.push_back(make_check("e_strictly_decreasing", inv, detail::successive_ratio_max(rep.e), "<", 1.0,
                                      "exact"));
      break;
    }
  }
  out.flags["family"] = rep.family;
  out.flags["d_slope"] = rep.d_slope;
  out.flags["ratio"] = rep.ratio;
  detail::write_summary(dir, out, cfg);
  return out;
}

/// Bare classical solve; dumps every `dump_every`-th layer and the final one.
inline StudyOutcome run_solve(const StudyConfig& cfg, const std::filesystem::path& dir) {
  detail::prepare(dir);
  const auto& s = cfg.solve;
  const Grid grid(cfg.domain, s.res.nx, s.res.ny);
  const TimePartition times(cfg.T, s.res.nt);
  const VelocityField u = cfg.velocity();
  const Layer rho0 = Layer::sample(grid, cfg.density);
  const auto [lo_it, hi_it] = std::minmax_element(rho0.values().begin(), rho0.values().end());
  const double lo0 = *lo_it, hi0 = *hi_it;
  double excess = 0.0;
  StudyOutcome out;
  out.study = "solve";
  solve_classical_stream(rho0, u, times, [&](std::size_t j, const Layer& l) {
    const auto [a, b] = std::minmax_element(l.values().begin(), l.values().end());
    excess = std::max({excess, lo0 - *a, *b - hi0});
    if (j % s.dump_every == 0 || j == times.steps()) {
      char name[32];
      std::snprintf(name, sizeof name, "layer_%06zu", j);
      write_layer(dir / name, l, times.t(j), j);
      out.files.push_back(std::string(name) + ".csv");
    }
  }, detail::solve_options(cfg));
  out.checks.push_back(make_check("max_principle", "min rho0 <= rho <= max rho0", std::max(0.0, excess), "<=",
                                  cfg.conservation.max_principle_tolerance, "exact"));
  detail::write_summary(dir, out, cfg);
  return out;
}

}  // namespace translab

#endif  // TRANSLAB_STUDIES_HPP
