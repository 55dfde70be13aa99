#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cycle_check.hpp"
#include "decay.hpp"
#include "gaussian.hpp"
#include "grid.hpp"
#include "weyl.hpp"

namespace qframes {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

/// One checked statement of an experiment. expected and measured are kept as
/// text so exact rationals survive into the report.
struct Claim {
  std::string name;
  std::string expected;
  std::string measured;
  double abs_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;

  static Claim exact(std::string name, const Rational& expected, const Rational& measured) {
    return {std::move(name), to_string(expected), to_string(measured), to_double(abs(Rational(expected - measured))),
            0.0, expected == measured};
  }

  static Claim holds(std::string name, bool ok) {
    return {std::move(name), "true", ok ? "true" : "false", ok ? 0.0 : 1.0, 0.0, ok};
  }

  /// failures out of total random trials; passes only with none.
  static Claim trials(std::string name, std::size_t failures, std::size_t total) {
    return {std::move(name) + " (" + std::to_string(total) + " trials)", "0", std::to_string(failures),
            static_cast<double>(failures), 0.0, failures == 0};
  }

  static Claim within(std::string name, double expected, double measured, double tolerance) {
    const double err = std::abs(expected - measured);
    return {std::move(name), format_double(expected), format_double(measured), err, tolerance,
            std::isfinite(measured) && err <= tolerance};
  }

  /// |measured| <= bound; used for error figures whose ideal value is zero.
  static Claim bounded(std::string name, double measured, double bound) {
    return within(std::move(name), 0.0, measured, bound);
  }
};

struct RunReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::vector<Claim> claims;
  double seconds = 0.0;

  bool passed() const {
    return !claims.empty() && std::all_of(claims.begin(), claims.end(), [](const Claim& c) { return c.passed; });
  }
};

/// Parameters of one experiment run. Values are exact "p", "p/q" or
/// "-p/q" strings; list-valued parameters hold several.
struct ScenarioConfig {
  std::string experiment;
  std::map<std::string, std::vector<std::string>> parameters;
  std::uint64_t seed = 20240917;
  std::string output_dir;
  bool trajectories = false;

  static const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"E1", {"hbar", "a", "v", "m", "m1", "m2", "samples"}},
        {"E2", {"hbar", "n", "half_extent", "sigma", "x0", "p0", "a_cells", "v", "t", "m"}},
        {"E3", {"hbar", "g", "m", "alpha", "n", "half_extent", "dt", "t_final", "sample_interval", "sigma", "x0",
                "p0"}},
        {"E4", {"hbar", "samples", "max_degree"}},
        {"E5", {"hbar", "M", "m", "g", "n", "half_extent", "dt", "t_final", "sample_interval", "sigma"}},
        {"E6", {"hbar", "M1", "M2", "m", "kappa", "samples", "t_final", "sample_interval"}},
        {"E7", {"a_squared", "theta", "samples"}},
    };
    return s;
  }

  void validate() const {
    const auto it = schema().find(experiment);
    if (it == schema().end()) throw ConfigError("unknown experiment '" + experiment + "'");
    for (const auto& [key, values] : parameters) {
      if (!it->second.count(key)) throw ConfigError("experiment " + experiment + " has no parameter '" + key + "'");
      if (values.empty()) throw ConfigError("parameter '" + key + "' has no value");
      for (const auto& v : values) parse_rational(v);
    }
  }

  /// Applies "key=v1,v2,..." from the command line.
  void set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + assignment + "'");
    std::vector<std::string> values;
    std::string rest = assignment.substr(eq + 1);
    std::size_t start = 0;
    while (true) {
      const auto comma = rest.find(',', start);
      values.push_back(rest.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    parameters[assignment.substr(0, eq)] = std::move(values);
  }

  Rational rational(const std::string& key, const Rational& fallback) const {
    const auto it = parameters.find(key);
    if (it == parameters.end()) return fallback;
    if (it->second.size() != 1) throw ConfigError("parameter '" + key + "' takes a single value");
    return parse_rational(it->second.front());
  }

  std::vector<Rational> rationals(const std::string& key, std::vector<Rational> fallback) const {
    const auto it = parameters.find(key);
    if (it == parameters.end()) return fallback;
    std::vector<Rational> out;
    for (const auto& v : it->second) out.push_back(parse_rational(v));
    return out;
  }

  long integer(const std::string& key, long fallback) const {
    const Rational q = rational(key, Rational(fallback));
    if (q.get_den() != 1 || !q.get_num().fits_slong_p()) throw ConfigError("parameter '" + key + "' must be an integer");
    return q.get_num().get_si();
  }

  double real(const std::string& key, const Rational& fallback) const { return to_double(rational(key, fallback)); }

  Units units() const { return Units{rational("hbar", Rational(1))}; }

  static ScenarioConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("run configuration must be an object");
    static const std::set<std::string> keys{"experiment", "parameters", "seed", "output_dir", "trajectories"};
    for (const auto& [key, _] : j.items())
      if (!keys.count(key)) throw ConfigError("unknown configuration key '" + key + "'");
    ScenarioConfig c;
    if (!j.contains("experiment") || !j["experiment"].is_string()) throw ConfigError("'experiment' must be a string");
    c.experiment = j["experiment"].get<std::string>();
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) throw ConfigError("'seed' must be a non-negative integer");
      c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output_dir")) {
      if (!j["output_dir"].is_string()) throw ConfigError("'output_dir' must be a string");
      c.output_dir = j["output_dir"].get<std::string>();
    }
    if (j.contains("trajectories")) {
      if (!j["trajectories"].is_boolean()) throw ConfigError("'trajectories' must be a boolean");
      c.trajectories = j["trajectories"].get<bool>();
    }
    if (j.contains("parameters")) {
      if (!j["parameters"].is_object()) throw ConfigError("'parameters' must be an object");
      auto scalar = [](const std::string& key, const nlohmann::json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        throw ConfigError("parameter '" + key + "' must be an integer or a \"p/q\" string");
      };
      for (const auto& [key, v] : j["parameters"].items()) {
        std::vector<std::string> values;
        if (v.is_array()) {
          for (const auto& e : v) values.push_back(scalar(key, e));
        } else {
          values.push_back(scalar(key, v));
        }
        c.parameters[key] = std::move(values);
      }
    }
    c.validate();
    return c;
  }

  nlohmann::json to_json() const {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [key, values] : parameters) params[key] = values.size() == 1 ? nlohmann::json(values[0]) : nlohmann::json(values);
    nlohmann::json j{{"experiment", experiment}, {"seed", seed}, {"parameters", params}};
    if (!output_dir.empty()) j["output_dir"] = output_dir;
    if (trajectories) j["trajectories"] = true;
    return j;
  }
};

/// A configuration file holds one run object or {"runs": [...]}.
inline std::vector<ScenarioConfig> load_configs(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read configuration '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed configuration '" + path + "': " + e.what());
  }
  std::vector<ScenarioConfig> out;
  if (j.is_object() && j.contains("runs")) {
    if (j.size() != 1 || !j["runs"].is_array()) throw ConfigError("'runs' must be the only key and hold an array");
    for (const auto& r : j["runs"]) out.push_back(ScenarioConfig::from_json(r));
  } else {
    out.push_back(ScenarioConfig::from_json(j));
  }
  return out;
}

/// Command line, then QFRAMES_OUT_DIR, then the configuration, then "reports".
inline std::string resolve_output_dir(const std::string& cli, const std::string& config) {
  if (!cli.empty()) return cli;
  if (const char* env = std::getenv("QFRAMES_OUT_DIR"); env && *env) return env;
  if (!config.empty()) return config;
  return "reports";
}

namespace detail {

/// Seeded source of small random rationals.
class RationalSampler {
 public:
  explicit RationalSampler(std::uint64_t seed) : rng_(seed) {}

  Rational any() { return make_rational(int_in(-24, 24), int_in(1, 16)); }
  Rational positive() { return make_rational(int_in(1, 24), int_in(1, 16)); }
  Rational nonzero() {
    Rational q;
    do q = any();
    while (q == 0);
    return q;
  }
  Polynomial polynomial(long max_degree) {
    std::vector<Rational> c(static_cast<std::size_t>(int_in(1, max_degree + 1)));
    for (auto& v : c) v = any();
    return Polynomial(std::move(c));
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  long int_in(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng_); }

 private:
  std::mt19937_64 rng_;
};

/// Largest relative deviation |a - b| / max(|b|, 1) over mean and covariance.
inline double moment_deviation(const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& cov_a, const Eigen::VectorXd& mean_b,
                               const Eigen::MatrixXd& cov_b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < mean_a.size(); ++i)
    worst = std::max(worst, std::abs(mean_a(i) - mean_b(i)) / std::max(std::abs(mean_b(i)), 1.0));
  for (Eigen::Index i = 0; i < cov_a.rows(); ++i)
    for (Eigen::Index j = 0; j < cov_a.cols(); ++j)
      worst = std::max(worst, std::abs(cov_a(i, j) - cov_b(i, j)) / std::max(std::abs(cov_b(i, j)), 1.0));
  return worst;
}

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

/// Constant value of a form that must not depend on the state; nullopt otherwise.
inline std::optional<Rational> constant_value(const LinearForm& f) {
  if (!f.is_constant() || !f.constant.is_constant()) return std::nullopt;
  return f.constant.coefficient(0);
}

inline Claim constant_claim(std::string name, const Rational& expected, const LinearForm& f) {
  const auto v = constant_value(f);
  if (!v) return {std::move(name), to_string(expected), "state dependent", 1.0, 0.0, false};
  return Claim::exact(std::move(name), expected, *v);
}

struct GridRun {
  std::vector<double> times;
  std::vector<GridMoments> moments;
  GridState final_state;
};

inline GridRun run_grid(const GridState& initial, const QuadraticHamiltonian& h, double t_final, double dt,
                        double sample_interval) {
  GridRun run;
  PropagationOptions opts;
  const double per_sample = sample_interval / dt;
  if (std::abs(per_sample - std::round(per_sample)) > 1e-9 || per_sample < 1.0) {
    throw ConfigError("sample_interval must be a whole number of time steps");
  }
  opts.sample_every = static_cast<std::size_t>(std::llround(per_sample));
  opts.observer = [&run](const GridState& s) {
    run.times.push_back(s.time);
    run.moments.push_back(grid_moments(s));
  };
  run.final_state = propagate(initial, h, t_final, dt, opts);
  return run;
}

inline double grid_gaussian_deviation(const GridRun& grid, const std::vector<GaussianState>& gauss) {
  if (grid.moments.size() != gauss.size()) throw DimensionError("grid and Gaussian sample counts differ");
  double worst = 0.0;
  for (std::size_t k = 0; k < gauss.size(); ++k) {
    worst = std::max(worst, moment_deviation(grid.moments[k].mean, grid.moments[k].covariance, gauss[k].mean,
                                             gauss[k].covariance));
  }
  return worst;
}

inline std::vector<double> grid_mean_series(const GridRun& run, std::size_t index) {
  std::vector<double> v;
  for (const auto& m : run.moments) v.push_back(m.mean(static_cast<Eigen::Index>(index)));
  return v;
}

inline std::string slug(std::string s) {
  for (auto& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
  return s;
}

struct RunContext {
  const ScenarioConfig& config;
  std::string trajectory_dir;  // empty: no trajectory files
  RationalSampler sampler;

  void trajectory(const std::string& label, const std::vector<GaussianState>& traj) const {
    if (trajectory_dir.empty()) return;
    std::filesystem::create_directories(trajectory_dir);
    write_trajectory_csv(traj, trajectory_dir + "/" + config.experiment + "_" + slug(label) + ".csv");
  }
};

// Bargmann cycle and the mass-superposition phase.
inline std::vector<Claim> experiment_e1(RunContext& ctx) {
  const auto& c = ctx.config;
  const Units units = c.units();
  const Units unit_hbar{Rational(1)};
  const Rational a = c.rational("a", Rational(1));
  const Rational v = c.rational("v", Rational(1));
  const Rational m = c.rational("m", Rational(1));
  const Rational m1 = c.rational("m1", Rational(1));
  const Rational m2 = c.rational("m2", Rational(2));
  const auto samples = static_cast<std::size_t>(c.integer("samples", 100));

  std::vector<Claim> claims;
  const WeylElement gc = product(bargmann_factors(a, v, m, units), units);
  claims.push_back(Claim::holds("cycle_is_pure_phase", gc.is_cyclic() && gc.phase.is_constant()));
  const Rational phase = bargmann_cycle(a, v, m, units);
  claims.push_back(Claim::exact("cycle_phase", a * v * m / units.hbar, phase));
  claims.push_back(Claim::within("cycle_phase_mod_2pi", reduce_phase(Rational(a * v * m / units.hbar)),
                                 reduce_phase(phase), 1e-12));
  claims.push_back(Claim::exact("relative_phase", a * v * (m2 - m1) / units.hbar,
                                mass_superposition_relative_phase(a, v, m1, m2, units)));
  const auto report = bargmann_report(a, v, {m1, m2}, units);
  claims.push_back(Claim::exact("per_mass_phase_difference", a * v * (m2 - m1) / units.hbar,
                                report.per_mass_phases.at(m2) - report.per_mass_phases.at(m1)));

  std::size_t bad_phase = 0, bad_relative = 0, bad_linear = 0, bad_scaling = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const Rational ra = ctx.sampler.any(), rv = ctx.sampler.any(), rm = ctx.sampler.positive();
    const Rational rm2 = ctx.sampler.positive();
    if (bargmann_cycle(ra, rv, rm, units) != ra * rv * rm / units.hbar) ++bad_phase;
    if (mass_superposition_relative_phase(ra, rv, rm, rm2, units) != ra * rv * (rm2 - rm) / units.hbar) ++bad_relative;
    const Rational rb = ctx.sampler.any();
    if (bargmann_cycle(ra + rb, rv, rm, units) != bargmann_cycle(ra, rv, rm, units) + bargmann_cycle(rb, rv, rm, units))
      ++bad_linear;
    if (bargmann_cycle(ra, rv, rm, units) * units.hbar != bargmann_cycle(ra, rv, rm, unit_hbar)) ++bad_scaling;
  }
  claims.push_back(Claim::trials("cycle_phase_random", bad_phase, samples));
  claims.push_back(Claim::trials("relative_phase_random", bad_relative, samples));
  claims.push_back(Claim::trials("phase_additive_in_a", bad_linear, samples));
  claims.push_back(Claim::trials("phase_scales_as_inverse_hbar", bad_scaling, samples));
  return claims;
}

// Cyclic expectation invariance on a grid.
inline std::vector<Claim> experiment_e2(RunContext& ctx) {
  const auto& c = ctx.config;
  const Units units = c.units();
  const long n = c.integer("n", 4096);
  const Rational half = c.rational("half_extent", Rational(256, 5));
  const Rational spacing = 2 * half / Rational(n);
  const Rational a = spacing * c.integer("a_cells", 16);
  const Rational v = c.rational("v", Rational(1));
  const Rational t = c.rational("t", Rational(1, 2));
  const Rational m = c.rational("m", Rational(1));
  if (!is_integer(Rational(v * t / spacing))) throw ConfigError("v t must be a whole number of grid cells");

  const GridSpec spec = GridSpec::line(-to_double(half), to_double(half), static_cast<std::size_t>(n));
  const GridState psi = make_gaussian(spec, c.real("x0", Rational(0)), c.real("p0", Rational(1, 2)),
                                      c.real("sigma", Rational(1)), units);
  const auto elements = bargmann_factors(a, v, m, units);
  const auto x = Observable::position(0);
  const auto p = Observable::momentum(0);
  const auto p2 = Observable::momentum_squared(0);
  const auto x2 = Observable::position_squared(0);

  const auto inv = cyclic_expectation_invariance(elements, psi, x, t);
  const GridState& out = inv.transformed;
  const Rational phase = a * v * m / units.hbar;

  std::vector<Claim> claims;
  claims.push_back(Claim::holds("composition_is_pure_phase", inv.composed.is_cyclic() && inv.composed.phase.is_constant()));
  claims.push_back(Claim::exact("composition_phase", phase, inv.composed.phase.coefficient(0)));
  claims.push_back(Claim::within("fidelity", 1.0, fidelity(psi, out), 1e-10));
  claims.push_back(Claim::bounded("delta_x", inv.after - inv.before, 1e-10));
  claims.push_back(Claim::bounded("delta_x2", expectation(out, x2) - expectation(psi, x2), 1e-10));
  claims.push_back(Claim::bounded("delta_p", expectation(out, p) - expectation(psi, p), 1e-10));
  claims.push_back(Claim::bounded("delta_p2", expectation(out, p2) - expectation(psi, p2), 1e-10));
  claims.push_back(Claim::bounded("norm_drift", out.norm() - psi.norm(), 1e-12));

  // <psi | U^dagger psi> = e^{-i a v m / hbar}
  const double expected_arg = std::remainder(-to_double(phase), 2.0 * std::numbers::pi);
  const double measured_arg = std::arg(overlap(psi, out));
  Claim arg = Claim::within("overlap_phase", expected_arg, measured_arg, 1e-9);
  arg.abs_error = std::abs(std::remainder(measured_arg - expected_arg, 2.0 * std::numbers::pi));
  arg.passed = arg.abs_error <= arg.tolerance;
  claims.push_back(arg);
  return claims;
}

// Gauge independence of the frame acceleration.
inline std::vector<Claim> experiment_e3(RunContext& ctx) {
  const auto& c = ctx.config;
  const Units units = c.units();
  const Rational g = c.rational("g", Rational(2));
  const Rational m = c.rational("m", Rational(1));
  const auto alphas = c.rationals("alpha", {Rational(0), Rational(1, 4), Rational(1, 2), Rational(3, 4), Rational(1)});
  const long n = c.integer("n", 4096);
  const double half = c.real("half_extent", Rational(40));
  const double dt = c.real("dt", Rational(1, 1000));
  const double t_final = c.real("t_final", Rational(1));
  const double interval = c.real("sample_interval", Rational(1, 10));
  const PacketParameters packet{c.real("x0", Rational(0)), c.real("p0", Rational(0)), c.real("sigma", Rational(1))};

  const FrameTrajectory traj = FrameTrajectory::uniformly_accelerated(g);
  const QuadraticHamiltonian free = models::free_particle(m);
  std::vector<std::pair<std::string, QuadraticHamiltonian>> variants{
      {"shift_frame", passive_hamiltonian_timedep(free, WeylElement::translation(traj.position), units)},
      {"galilei_frame", passive_hamiltonian_timedep(free, galilei_element(m, traj, units), units)},
  };
  for (const auto& alpha : alphas) variants.emplace_back("alpha=" + to_string(alpha), alpha_hamiltonian(m, traj, alpha));

  std::vector<Claim> claims;
  {
    const auto& shift = variants[0].second;
    const auto& galilei = variants[1].second;
    const auto alpha0 = alpha_hamiltonian(m, traj, Rational(0));
    const auto alpha1 = alpha_hamiltonian(m, traj, Rational(1));
    claims.push_back(Claim::holds("galilei_frame_is_alpha_0", models::same_coefficients(galilei, alpha0)));
    claims.push_back(Claim::holds("shift_frame_is_alpha_1_up_to_scalar",
                                  shift.quadratic == alpha1.quadratic && shift.linear == alpha1.linear));
  }

  const GridSpec spec = GridSpec::line(-half, half, static_cast<std::size_t>(n));
  const GridState psi0 = make_gaussian(spec, std::vector<PacketParameters>{packet}, units);
  const std::size_t x_axis = 0;
  const double expected = -to_double(g);
  double lowest = std::numeric_limits<double>::infinity(), highest = -lowest;
  std::map<std::string, GridState> finals;
  EvolveOptions eopts;
  eopts.sample_interval = interval;

  for (const auto& [name, h] : variants) {
    const GaussianState gs0 = product_state(h.coordinates, {packet}, units);
    const auto traj_g = evolve(gs0, h, t_final, eopts);
    ctx.trajectory(name, traj_g);
    const auto est = gaussian_acceleration(traj_g, h, x_axis);
    claims.push_back(constant_claim(name + ":symbolic_acceleration", -g, est.form));
    claims.push_back(Claim::within(name + ":gaussian_fd_acceleration", expected, est.numeric.value, 1e-9));

    const GridRun run = run_grid(psi0, h, t_final, dt, interval);
    const auto fd = fd_acceleration(grid_mean_series(run, x_axis), interval);
    claims.push_back(Claim::within(name + ":grid_fd_acceleration", expected, fd.value, 5e-3 * std::abs(expected)));
    claims.push_back(Claim::bounded(name + ":grid_vs_gaussian", grid_gaussian_deviation(run, traj_g), 1e-6));
    lowest = std::min(lowest, fd.value);
    highest = std::max(highest, fd.value);
    finals.emplace(name, run.final_state);
  }
  claims.push_back(Claim::bounded("gauge_spread", highest - lowest, 5e-3 * std::abs(expected)));

  // The two frame states differ by the kick m Xdot(t_f) x' and a global phase.
  WeylElement unkick;
  unkick.kick = Polynomial(Rational(-m) * traj.velocity()(Rational(c.rational("t_final", Rational(1)))));
  const GridState aligned = apply_weyl(finals.at("galilei_frame"), unkick, c.rational("t_final", Rational(1)));
  claims.push_back(Claim::within("frame_states_agree_after_kick", 1.0, fidelity(finals.at("shift_frame"), aligned), 1e-6));
  return claims;
}

// Composition law of displacement generators.
inline std::vector<Claim> experiment_e4(RunContext& ctx) {
  const auto& c = ctx.config;
  const Units units = c.units();
  const Units unit_hbar{Rational(1)};
  const auto samples = static_cast<std::size_t>(c.integer("samples", 100));
  const long degree = c.integer("max_degree", 3);
  if (degree < 0) throw ConfigError("max_degree must be non-negative");

  std::size_t bad_poly = 0, bad_point = 0, bad_assoc = 0, bad_inverse = 0, bad_scaling = 0, bad_static = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const Rational m = ctx.sampler.positive();
    const FrameTrajectory x1(ctx.sampler.polynomial(degree));
    const FrameTrajectory x2(ctx.sampler.polynomial(degree));
    const WeylElement g1 = galilei_element(m, x1, units);
    const WeylElement g2 = galilei_element(m, x2, units);
    const WeylElement g12 = galilei_element(m, FrameTrajectory(x1.position + x2.position), units);
    const WeylElement lhs = compose(g2, g1, units);
    const Polynomial big_theta = composition_phase(m, x1, x2, units);

    if (lhs.shift != g12.shift || lhs.kick != g12.kick || lhs.phase - g12.phase != big_theta) ++bad_poly;
    const Rational t = ctx.sampler.any();
    if (lhs.phase(t) != g12.phase(t) + big_theta(t)) ++bad_point;
    if (composition_phase(m, x1, x2, units) * units.hbar != composition_phase(m, x1, x2, unit_hbar)) ++bad_scaling;
    const FrameTrajectory c1 = FrameTrajectory::constant(ctx.sampler.any());
    const FrameTrajectory c2 = FrameTrajectory::constant(ctx.sampler.any());
    if (!composition_phase(m, c1, c2, units).is_zero()) ++bad_static;

    WeylElement a{ctx.sampler.polynomial(degree), ctx.sampler.polynomial(degree), ctx.sampler.polynomial(degree), {}};
    WeylElement b{ctx.sampler.polynomial(degree), ctx.sampler.polynomial(degree), ctx.sampler.polynomial(degree), {}};
    WeylElement d{ctx.sampler.polynomial(degree), ctx.sampler.polynomial(degree), ctx.sampler.polynomial(degree), {}};
    if (!(compose(d, compose(b, a, units), units) == compose(compose(d, b, units), a, units))) ++bad_assoc;
    if (!compose(inverse(a, units), a, units).is_identity() || !compose(a, inverse(a, units), units).is_identity())
      ++bad_inverse;
  }
  return {Claim::trials("composition_law_polynomial", bad_poly, samples),
          Claim::trials("composition_law_pointwise", bad_point, samples),
          Claim::trials("static_frames_compose_without_phase", bad_static, samples),
          Claim::trials("phase_scales_as_inverse_hbar", bad_scaling, samples),
          Claim::trials("associativity", bad_assoc, samples),
          Claim::trials("inverse", bad_inverse, samples)};
}

// Two-body quantum frame in a uniform field.
inline std::vector<Claim> experiment_e5(RunContext& ctx) {
  const auto& c = ctx.config;
  const Units units = c.units();
  const Rational big_m = c.rational("M", Rational(3));
  const Rational m = c.rational("m", Rational(1));
  const Rational g = c.rational("g", Rational(1));
  const long n = c.integer("n", 512);
  const double half = c.real("half_extent", Rational(20));
  const double dt = c.real("dt", Rational(1, 100));
  const double t_final = c.real("t_final", Rational(1));
  const double interval = c.real("sample_interval", Rational(1, 10));
  const double sigma = c.real("sigma", Rational(1));

  const models::LinearField field{-big_m * g};
  const auto particles = models::two_body(big_m, m);
  const QuadraticHamiltonian lab = models::frame_and_particle(big_m, m, field);
  const Rational mu = reduced_mass(big_m, m);
  const Rational total = big_m + m;
  const double expected = -to_double(g);

  std::vector<Claim> claims;
  const AffineFrameMap ak = builtin_map(BuiltinMap::aharonov_kaufherr, particles);
  const AffineFrameMap rc = builtin_map(BuiltinMap::relative_cm, particles);
  const QuadraticHamiltonian h_ak = conjugate_hamiltonian(lab, ak);
  const QuadraticHamiltonian h_rc = conjugate_hamiltonian(lab, rc);
  claims.push_back(Claim::holds("aharonov_kaufherr:canonical", check_canonical(ak).canonical));
  claims.push_back(Claim::holds("relative_cm:canonical", check_canonical(rc).canonical));
  claims.push_back(Claim::holds("aharonov_kaufherr:coefficients",
                                models::same_coefficients(h_ak, models::aharonov_kaufherr_form(big_m, m, field))));
  claims.push_back(Claim::holds("relative_cm:coefficients",
                                models::same_coefficients(h_rc, models::relative_cm_form(big_m, m, field))));
  claims.push_back(Claim::exact("aharonov_kaufherr:inverse_reduced_mass", 1 / mu, h_ak.quadratic(3, 3)));
  claims.push_back(Claim::exact("relative_cm:inverse_reduced_mass", 1 / mu, h_rc.quadratic(3, 3)));
  claims.push_back(Claim::exact("relative_cm:inverse_total_mass", 1 / total, h_rc.quadratic(1, 1)));
  {
    const QuadraticHamiltonian folded = h_rc.folded();
    const Polynomial& force = folded.linear[2];
    claims.push_back(Claim::exact("relative_cm:field_term_on_x", mu * g, force.is_constant() ? force.coefficient(0) : Rational(0)));
  }

  const GridSpec spec = GridSpec::square(-half, half, static_cast<std::size_t>(n));
  const std::vector<PacketParameters> packets{{0.0, 0.0, sigma}, {0.0, 0.0, sigma}};
  const GridState psi0 = make_gaussian(spec, packets, units);
  EvolveOptions eopts;
  eopts.sample_interval = interval;
  const GaussianState lab0 = product_state(lab.coordinates, {{1.0, 0.0, sigma}, {-1.0, 0.5, sigma}}, units);
  const auto lab_traj = evolve(lab0, lab, t_final, eopts);
  ctx.trajectory("lab", lab_traj);
  const std::size_t x_axis = 2;

  for (const auto& [name, h, map] : {std::tuple{std::string("aharonov_kaufherr"), h_ak, ak},
                                     std::tuple{std::string("relative_cm"), h_rc, rc}}) {
    claims.push_back(constant_claim(name + ":symbolic_acceleration", -g, heisenberg_acceleration(h, x_axis)));

    const auto traj = evolve(product_state(h.coordinates, packets, units), h, t_final, eopts);
    ctx.trajectory(name, traj);
    claims.push_back(Claim::within(name + ":gaussian_fd_acceleration", expected,
                                   fd_acceleration(mean_series(traj, x_axis), interval).value, 1e-9));

    const GridRun run = run_grid(psi0, h, t_final, dt, interval);
    const auto fd = fd_acceleration(grid_mean_series(run, x_axis), interval);
    claims.push_back(Claim::within(name + ":grid_fd_acceleration", expected, fd.value, 5e-3 * std::abs(expected)));
    claims.push_back(Claim::bounded(name + ":grid_vs_gaussian", grid_gaussian_deviation(run, traj), 1e-6));

    // passive and active pictures commute with evolution
    const auto moved = evolve(map_state(lab0, map), h, t_final, eopts);
    double mismatch = 0.0;
    for (std::size_t k = 0; k < moved.size(); ++k) {
      const GaussianState mapped = map_state(lab_traj[k], map);
      mismatch = std::max({mismatch, (mapped.mean - moved[k].mean).cwiseAbs().maxCoeff(),
                           (mapped.covariance - moved[k].covariance).cwiseAbs().maxCoeff()});
    }
    claims.push_back(Claim::bounded(name + ":transport_mismatch", mismatch, 1e-9));
  }

  // Active form of the relative coordinate: psi(X, x) -> psi(X, x + X).
  const GridState lab_grid = make_gaussian(spec, {{1.0, 0.0, sigma}, {-1.0, 0.5, sigma}}, units);
  const GridState shifted = apply_conditional_shift(lab_grid, ShiftDirection::forward);
  const GridMoments gm = grid_moments(shifted);
  const GaussianState expected_state = map_state(lab0, ak);
  claims.push_back(Claim::bounded("conditional_shift:matches_map",
                                  moment_deviation(gm.mean, gm.covariance, expected_state.mean, expected_state.covariance),
                                  1e-6));
  const GridState back = apply_conditional_shift(shifted, ShiftDirection::inverse);
  claims.push_back(Claim::holds("conditional_shift:round_trip", back.amplitudes == lab_grid.amplitudes));
  return claims;
}

// Three bodies: two frames and a particle.
inline std::vector<Claim> experiment_e6(RunContext& ctx) {
  const auto& c = ctx.config;
  const Units units = c.units();
  const Rational m1 = c.rational("M1", Rational(1));
  const Rational m2 = c.rational("M2", Rational(1));
  const Rational m = c.rational("m", Rational(1));
  const Rational kappa = c.rational("kappa", Rational(1));
  const auto samples = static_cast<std::size_t>(c.integer("samples", 20));
  EvolveOptions eopts;
  eopts.sample_interval = c.real("sample_interval", Rational(1, 10));
  const double t_final = c.real("t_final", Rational(1));

  struct Structure {
    bool set1_canonical, set2_canonical;
    Rational x2_p, x_p2;  // [X2'(set1), p'(set2)], [x'(set1), P2'(set2)]
    bool set1_form, set2_form, boost_form, boost_canonical;
  };
  auto structure = [](const Rational& a1, const Rational& a2, const Rational& am, const Rational& slope) {
    const auto particles = models::three_body(a1, a2, am);
    const models::LinearField field{slope};
    const auto lab = models::two_frames_and_particle(a1, a2, am, field);
    const auto s1 = builtin_map(BuiltinMap::set1, particles);
    const auto s2 = builtin_map(BuiltinMap::set2, particles);
    const auto boost = builtin_map(BuiltinMap::double_boost, particles);
    const auto h1 = conjugate_hamiltonian(lab, s1);
    Structure s;
    s.set1_canonical = check_canonical(s1).canonical;
    s.set2_canonical = check_canonical(s2).canonical;
    s.x2_p = mixed_commutator(s1, 2, s2, 5);
    s.x_p2 = mixed_commutator(s1, 4, s2, 3);
    s.set1_form = models::same_coefficients(h1, models::set1_form(a1, a2, am, field));
    s.set2_form = models::same_coefficients(conjugate_hamiltonian(lab, s2), models::set2_form(a1, a2, am, field));
    s.boost_form = models::same_coefficients(conjugate_hamiltonian(h1, boost), models::double_boost_form(a1, a2, am, field));
    s.boost_canonical = check_canonical(boost).canonical;
    return s;
  };

  std::vector<Claim> claims;
  const Structure base = structure(m1, m2, m, kappa);
  claims.push_back(Claim::holds("set1:canonical", base.set1_canonical));
  claims.push_back(Claim::holds("set2:canonical", base.set2_canonical));
  claims.push_back(Claim::holds("double_boost:canonical", base.boost_canonical));
  claims.push_back(Claim::exact("commutator_X2_set1_p_set2", m / (m1 + m), base.x2_p));
  claims.push_back(Claim::exact("commutator_x_set1_P2_set2", m2 / (m1 + m2), base.x_p2));
  claims.push_back(Claim::holds("set1:coefficients", base.set1_form));
  claims.push_back(Claim::holds("set2:coefficients", base.set2_form));
  claims.push_back(Claim::holds("double_boost:coefficients", base.boost_form));
  {
    const auto dm = DerivedMasses::from(m, m1, m2);
    const auto h2 = conjugate_hamiltonian(models::two_frames_and_particle(m1, m2, m, {kappa}),
                                          builtin_map(BuiltinMap::set2, models::three_body(m1, m2, m)));
    claims.push_back(Claim::exact("set2:gamma_over_2mu", dm.gamma / (2 * dm.mu), h2.quadratic(5, 5) / 2));
  }

  std::size_t bad_canonical = 0, bad_commutator = 0, bad_forms = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const Rational a1 = ctx.sampler.positive(), a2 = ctx.sampler.positive(), am = ctx.sampler.positive();
    const Structure s = structure(a1, a2, am, ctx.sampler.any());
    if (!s.set1_canonical || !s.set2_canonical || !s.boost_canonical) ++bad_canonical;
    if (s.x2_p != am / (a1 + am) || s.x_p2 != a2 / (a1 + a2)) ++bad_commutator;
    if (!s.set1_form || !s.set2_form || !s.boost_form) ++bad_forms;
  }
  claims.push_back(Claim::trials("canonical_random_masses", bad_canonical, samples));
  claims.push_back(Claim::trials("mixed_commutators_random_masses", bad_commutator, samples));
  claims.push_back(Claim::trials("coefficients_random_masses", bad_forms, samples));

  const CoordinateSystem reduced{{{"S2'", "X2'", "P2'"}, {"P'", "x'", "p'"}}};
  const GaussianState initial = product_state(reduced, {{1.0, 0.2, 1.0}, {0.0, -0.3, 1.0}}, units);
  for (const auto& [label, slope] : {std::pair{std::string("free"), Rational(0)}, std::pair{std::string("field"), kappa}}) {
    const auto r = double_boost_check(m1, m2, m, {slope}, initial, t_final, eopts);
    const double tol = slope == 0 ? 1e-12 : 1e-9;
    const QuadraticHamiltonian lab = models::two_frames_and_particle(m1, m2, m, {slope});
    const auto a1 = constant_value(heisenberg_acceleration(lab, 0));
    const auto a2 = constant_value(heisenberg_acceleration(lab, 2));
    claims.push_back(constant_claim(label + ":symbolic_x_set1", a1 ? Rational(-*a1) : Rational(0), r.first_frame.form));
    claims.push_back(constant_claim(label + ":symbolic_x_boosted", a2 ? Rational(-*a2) : Rational(0), r.second_frame.form));
    claims.push_back(Claim::within(label + ":fd_x_set1", r.expected_first, r.first_frame.numeric.value, tol));
    claims.push_back(Claim::within(label + ":fd_x_boosted", r.expected_second, r.second_frame.numeric.value, tol));
    claims.push_back(Claim::bounded(label + ":transport_mismatch", r.transport_mismatch, 1e-9));
  }
  return claims;
}

// Decay versus coherent mass superposition.
inline std::vector<Claim> experiment_e7(RunContext& ctx) {
  const auto& c = ctx.config;
  const Rational a2 = c.rational("a_squared", Rational(1, 2));
  if (a2 < 0 || a2 > 1) throw ConfigError("a_squared must lie in [0, 1]");
  const double theta = c.real("theta", Rational(0));
  const auto samples = static_cast<std::size_t>(c.integer("samples", 50));
  const double a = std::sqrt(to_double(a2));
  const double b = std::sqrt(to_double(Rational(1 - a2)));

  std::vector<Claim> claims;
  const auto rho_e = reduced_atom_state({a, b, theta, true});
  const auto rho_c = reduced_atom_state({a, b, theta, false});
  claims.push_back(Claim::within("entangled:purity", (a * a) * (a * a) + (b * b) * (b * b), purity(rho_e), 1e-15));
  claims.push_back(Claim::bounded("entangled:visibility", visibility(rho_e), 0.0));
  claims.push_back(Claim::within("coherent:purity", 1.0, purity(rho_c), 1e-15));
  claims.push_back(Claim::within("coherent:visibility", 2.0 * a * b, visibility(rho_c), 1e-15 * std::max(2.0 * a * b, 1.0)));

  std::size_t bad_purity = 0, bad_visibility = 0, bad_coherent = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double angle = ctx.sampler.uniform(0.0, std::numbers::pi / 2);
    const double ra = std::cos(angle), rb = std::sin(angle);
    const double phase = ctx.sampler.uniform(0.0, 2.0 * std::numbers::pi);
    const auto e = reduced_atom_state({ra, rb, phase, true});
    if (purity(e) != (ra * ra) * (ra * ra) + (rb * rb) * (rb * rb)) ++bad_purity;
    if (visibility(e) != 0.0) ++bad_visibility;
    const auto coh = reduced_atom_state({ra, rb, phase, false});
    if (std::abs(visibility(coh) - 2.0 * ra * rb) > 1e-15 || std::abs(purity(coh) - 1.0) > 1e-15) ++bad_coherent;
  }
  claims.push_back(Claim::trials("entangled:purity_random", bad_purity, samples));
  claims.push_back(Claim::trials("entangled:visibility_random", bad_visibility, samples));
  claims.push_back(Claim::trials("coherent:random", bad_coherent, samples));
  return claims;
}

}  // namespace detail

/// Runs one experiment. Trajectory CSVs go to trajectory_dir when non-empty.
inline RunReport run(const ScenarioConfig& config, const std::string& trajectory_dir = "") {
  config.validate();
  using Fn = std::vector<Claim> (*)(detail::RunContext&);
  static const std::map<std::string, Fn> table{
      {"E1", detail::experiment_e1}, {"E2", detail::experiment_e2}, {"E3", detail::experiment_e3},
      {"E4", detail::experiment_e4}, {"E5", detail::experiment_e5}, {"E6", detail::experiment_e6},
      {"E7", detail::experiment_e7},
  };
  detail::RunContext ctx{config, trajectory_dir, detail::RationalSampler(config.seed)};
  RunReport report;
  report.experiment = config.experiment;
  report.seed = config.seed;
  const auto start = std::chrono::steady_clock::now();
  report.claims = table.at(config.experiment)(ctx);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

/// Independent runs, optionally on separate threads. Reports keep input order.
inline std::vector<RunReport> run_all(const std::vector<ScenarioConfig>& configs, bool parallel,
                                      const std::string& trajectory_dir = "") {
  std::vector<RunReport> out;
  if (!parallel) {
    for (const auto& c : configs) out.push_back(run(c, c.trajectories ? trajectory_dir : ""));
    return out;
  }
  std::vector<std::future<RunReport>> jobs;
  for (const auto& c : configs)
    jobs.push_back(std::async(std::launch::async, [&c, &trajectory_dir] { return run(c, c.trajectories ? trajectory_dir : ""); }));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

inline std::vector<ScenarioConfig> default_configs(std::uint64_t seed) {
  std::vector<ScenarioConfig> out;
  for (const auto& [name, _] : ScenarioConfig::schema()) {
    ScenarioConfig c;
    c.experiment = name;
    c.seed = seed;
    out.push_back(std::move(c));
  }
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline void write_claims_csv(const std::vector<RunReport>& reports, std::ostream& os) {
  os << "experiment,claim,expected,measured,abs_error,tolerance,passed\n";
  for (const auto& r : reports)
    for (const auto& c : r.claims)
      os << r.experiment << ',' << csv_field(c.name) << ',' << csv_field(c.expected) << ',' << csv_field(c.measured)
         << ',' << format_double(c.abs_error) << ',' << format_double(c.tolerance) << ','
         << (c.passed ? "true" : "false") << '\n';
}

inline nlohmann::json summary_json(const std::vector<RunReport>& reports) {
  nlohmann::json runs = nlohmann::json::array();
  bool all = true;
  for (const auto& r : reports) {
    std::size_t failed = 0;
    for (const auto& c : r.claims) failed += c.passed ? 0 : 1;
    all = all && r.passed();
    runs.push_back({{"experiment", r.experiment},
                    {"seed", r.seed},
                    {"claims", r.claims.size()},
                    {"failed", failed},
                    {"seconds", r.seconds},
                    {"passed", r.passed()}});
  }
  return {{"runs", runs}, {"passed", all}};
}

/// Writes claims.csv and summary.json into dir.
inline void write_reports(const std::vector<RunReport>& reports, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir + "/claims.csv");
  if (!csv) throw ConfigError("cannot write into '" + dir + "'");
  write_claims_csv(reports, csv);
  std::ofstream js(dir + "/summary.json");
  js << summary_json(reports).dump(2) << '\n';
}

/// Named Hamiltonians for inspection. Masses, field and alpha come from the
/// configuration parameters (M, m, M1, M2, g, kappa, alpha).
inline std::vector<std::string> hamiltonian_names() {
  return {"lab_two_body", "aharonov_kaufherr", "relative_cm", "lab_three_body", "set1", "set2", "double_boost",
          "shift_frame",  "galilei_frame",     "alpha"};
}

inline QuadraticHamiltonian named_hamiltonian(const std::string& name, const std::map<std::string, Rational>& p) {
  auto get = [&p](const std::string& key, const Rational& fallback) {
    const auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
  };
  const Units units{get("hbar", Rational(1))};
  const Rational big_m = get("M", Rational(3)), m = get("m", Rational(1)), g = get("g", Rational(1));
  const Rational m1 = get("M1", Rational(1)), m2 = get("M2", Rational(1)), kappa = get("kappa", Rational(1));
  const models::LinearField two_field{-big_m * g};
  const models::LinearField three_field{kappa};
  const auto traj = FrameTrajectory::uniformly_accelerated(g);
  const auto lab2 = models::frame_and_particle(big_m, m, two_field);
  const auto lab3 = models::two_frames_and_particle(m1, m2, m, three_field);
  const auto p2 = models::two_body(big_m, m);
  const auto p3 = models::three_body(m1, m2, m);
  if (name == "lab_two_body") return lab2;
  if (name == "aharonov_kaufherr") return conjugate_hamiltonian(lab2, builtin_map(BuiltinMap::aharonov_kaufherr, p2));
  if (name == "relative_cm") return conjugate_hamiltonian(lab2, builtin_map(BuiltinMap::relative_cm, p2));
  if (name == "lab_three_body") return lab3;
  if (name == "set1") return conjugate_hamiltonian(lab3, builtin_map(BuiltinMap::set1, p3));
  if (name == "set2") return conjugate_hamiltonian(lab3, builtin_map(BuiltinMap::set2, p3));
  if (name == "double_boost") {
    const auto h1 = conjugate_hamiltonian(lab3, builtin_map(BuiltinMap::set1, p3));
    return conjugate_hamiltonian(h1, builtin_map(BuiltinMap::double_boost, p3));
  }
  if (name == "shift_frame")
    return passive_hamiltonian_timedep(models::free_particle(m), WeylElement::translation(traj.position), units);
  if (name == "galilei_frame")
    return passive_hamiltonian_timedep(models::free_particle(m), galilei_element(m, traj, units), units);
  if (name == "alpha") return alpha_hamiltonian(m, traj, get("alpha", Rational(0)));
  throw ConfigError("unknown Hamiltonian '" + name + "'");
}

}  // namespace qframes
