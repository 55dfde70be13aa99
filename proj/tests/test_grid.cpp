#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include <catch_amalgamated.hpp>

#include "qframes/cycle_check.hpp"
#include "qframes/grid.hpp"

using namespace qframes;

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

QuadraticHamiltonian harmonic(const Rational& m, const Rational& k) {
  auto h = models::free_particle(m);
  h.add_quadratic(0, 0, Rational(k / 2));
  return h;
}

std::vector<double> sorted_magnitudes(const GridState& s) {
  std::vector<double> v;
  for (const auto& a : s.amplitudes) v.push_back(std::abs(a));
  std::sort(v.begin(), v.end());
  return v;
}

WeylElement constant_element(const Rational& shift, const Rational& kick) {
  return {Polynomial(shift), Polynomial(kick), Polynomial{}, {}};
}

}  // namespace

TEST_CASE("Gaussian packets on the grid", "[grid]") {
  const Units units{q(1, 2)};
  const auto spec = GridSpec::line(-20.0, 20.0, 1024);
  const auto s = make_gaussian(spec, 1.5, -0.75, 0.8, units);
  CHECK(std::abs(s.norm() - 1.0) < 1e-12);
  CHECK(std::abs(expectation(s, Observable::position()) - 1.5) < 1e-10);
  CHECK(std::abs(expectation(s, Observable::momentum()) + 0.75) < 1e-10);
  const double var = expectation(s, Observable::position_squared()) - 1.5 * 1.5;
  CHECK(std::abs(var - 0.64) < 1e-8);
  const auto m = grid_moments(s);
  CHECK(std::abs(m.covariance(1, 1) - 0.25 / (4 * 0.64)) < 1e-8);
  CHECK(std::abs(m.covariance(0, 1)) < 1e-10);

  CHECK_THROWS_AS(make_gaussian(spec, 15.0, 0.0, 1.0, units), PacketTooWideError);
  CHECK_THROWS_AS(make_gaussian(spec, 0.0, 0.0, -1.0, units), PacketTooWideError);
  CHECK_THROWS_AS(make_gaussian(GridSpec::line(-20.0, 20.0, 1000), 0.0, 0.0, 1.0, units), GridMismatchError);
}

TEST_CASE("free propagation", "[grid]") {
  const Units units;
  const auto h = models::free_particle(q(2));
  const auto s0 = make_gaussian(GridSpec::line(-40.0, 40.0, 1024), -5.0, 2.0, 1.0, units);
  const auto s = propagate(s0, h, 2.0, 0.01);
  CHECK(s.time == Catch::Approx(2.0));
  CHECK(std::abs(expectation(s, Observable::position()) - (-5.0 + 2.0 * 2.0 / 2.0)) < 1e-6);
  CHECK(std::abs(expectation(s, Observable::momentum()) - 2.0) < 1e-6);

  SECTION("norm is conserved over a thousand steps") {
    const auto long_run = propagate(s0, h, 1.0, 1e-3);
    CHECK(std::abs(long_run.norm() - s0.norm()) < 1e-10);
  }
  SECTION("step must divide the interval") {
    CHECK_THROWS_AS(propagate(s0, h, 1.0, 0.3), DimensionError);
  }
}

TEST_CASE("split step is second order", "[grid]") {
  const Units units;
  const auto h = harmonic(q(1), q(1));
  const auto s0 = make_gaussian(GridSpec::line(-20.0, 20.0, 512), 1.0, 0.5, 0.9, units);
  const double exact = std::cos(1.0) + 0.5 * std::sin(1.0);
  std::vector<double> errors;
  for (double dt : {0.1, 0.05, 0.025}) {
    errors.push_back(std::abs(expectation(propagate(s0, h, 1.0, dt), Observable::position()) - exact));
  }
  const double r1 = errors[0] / errors[1];
  const double r2 = errors[1] / errors[2];
  CHECK(r1 > 3.5);
  CHECK(r1 < 4.5);
  CHECK(r2 > 3.5);
  CHECK(r2 < 4.5);
}

TEST_CASE("accelerated frame on the grid", "[grid]") {
  const Units units;
  const Rational m = q(1), g = q(2);
  const auto traj = FrameTrajectory::uniformly_accelerated(g);
  const auto spec = GridSpec::line(-30.0, 30.0, 1024);
  const auto s0 = make_gaussian(spec, 0.0, 0.0, 1.0, units);
  const double dt = 0.01, t_final = 2.0;

  std::vector<GridState> finals;
  for (const Rational& alpha : {q(0), q(1)}) {
    const auto h = alpha_hamiltonian(m, traj, alpha);
    std::vector<double> xs;
    PropagationOptions opts;
    opts.sample_every = 10;
    opts.observer = [&](const GridState& s) { xs.push_back(expectation(s, Observable::position())); };
    finals.push_back(propagate(s0, h, t_final, dt, opts));
    REQUIRE(xs.size() == 21);
    CHECK(std::abs(fd_acceleration(xs, 0.1).value + 2.0) < 1e-6);
  }
  SECTION("gauges agree once the kick m Xdot(t_f) is removed") {
    const Rational kick = m * traj.velocity()(q(2));
    const auto aligned = apply_weyl(finals[1], constant_element(q(0), kick), q(2));
    CHECK(fidelity(finals[0], aligned) > 1.0 - 1e-6);
    CHECK(fidelity(finals[0], finals[1]) < 0.5);
  }
}

TEST_CASE("propagation errors", "[grid]") {
  const Units units;
  const auto s0 = make_gaussian(GridSpec::line(-10.0, 10.0, 256), 0.0, 20.0, 0.5, units);
  SECTION("x p coupling is not separable") {
    auto h = models::free_particle(q(1));
    h.add_quadratic(0, 1, q(1));
    CHECK_THROWS_AS(propagate(s0, h, 0.1, 0.01), NonSeparableError);
  }
  SECTION("a packet that reaches the edge is reported") {
    CHECK_THROWS_AS(propagate(s0, models::free_particle(q(1)), 0.5, 0.01), BoundaryBreachError);
  }
  SECTION("grid rank must match the Hamiltonian") {
    CHECK_THROWS_AS(propagate(s0, models::frame_and_particle(q(1), q(1), {}), 0.1, 0.01), DimensionError);
  }
}

TEST_CASE("active Weyl application", "[grid]") {
  const Units units;
  const auto spec = GridSpec::line(-32.0, 32.0, 1024);
  const double cell = spec.axes[0].spacing();
  const auto s = make_gaussian(spec, 1.0, 0.5, 1.0, units);
  SECTION("identity leaves the state bitwise unchanged") {
    CHECK(apply_weyl(s, WeylElement::identity(), q(0)).amplitudes == s.amplitudes);
  }
  SECTION("whole-cell shift moves the mean by -X") {
    const Rational x = q(16) * make_rational(64, 1024);
    const auto out = apply_weyl(s, constant_element(x, q(0)), q(0));
    CHECK(std::abs(expectation(out, Observable::position()) - (1.0 - 16 * cell)) < 1e-10);
    CHECK(sorted_magnitudes(out) == sorted_magnitudes(s));
  }
  SECTION("kick moves the mean momentum by -K") {
    const auto out = apply_weyl(s, constant_element(q(0), q(3, 4)), q(0));
    CHECK(std::abs(expectation(out, Observable::momentum()) - (0.5 - 0.75)) < 1e-10);
    CHECK(std::abs(expectation(out, Observable::position()) - 1.0) < 1e-10);
  }
}

TEST_CASE("conditional shift", "[grid]") {
  const Units units;
  const auto spec = GridSpec::square(-8.0, 8.0, 64);  // spacing 1/4, min = -32 cells
  const double cell = spec.axes[0].spacing();
  SECTION("a localised particle moves by the frame position") {
    GridState s{spec, std::vector<Complex>(spec.size()), 0.0, units};
    const std::size_t frame_index = 32 + 4;  // X = 4 cells
    const std::size_t particle_index = 40;
    s.amplitudes[frame_index * 64 + particle_index] = 1.0;
    const auto out = apply_conditional_shift(s, ShiftDirection::forward);
    CHECK(std::abs(out.amplitudes[frame_index * 64 + particle_index - 4] - Complex(1.0)) == 0.0);
    CHECK(spec.axes[0].coordinate(frame_index) == 4 * cell);
  }
  SECTION("inverse undoes forward and magnitudes are permuted") {
    const auto s = make_gaussian(spec, {{1.0, 0.5, 0.7}, {-1.0, 0.0, 0.6}}, units);
    const auto fwd = apply_conditional_shift(s, ShiftDirection::forward);
    CHECK(apply_conditional_shift(fwd, ShiftDirection::inverse).amplitudes == s.amplitudes);
    CHECK(sorted_magnitudes(fwd) == sorted_magnitudes(s));
  }
  SECTION("grid requirements") {
    const auto line = make_gaussian(GridSpec::line(-8.0, 8.0, 64), 0.0, 0.0, 0.5, units);
    CHECK_THROWS_AS(apply_conditional_shift(line, ShiftDirection::forward), GridMismatchError);
    GridSpec uneven{{GridAxis{-8.0, 8.0, 64}, GridAxis{-8.0, 8.0, 128}}};
    GridState s{uneven, std::vector<Complex>(uneven.size()), 0.0, units};
    CHECK_THROWS_AS(apply_conditional_shift(s, ShiftDirection::forward), GridMismatchError);
    GridSpec offset{{GridAxis{-8.1, 7.9, 64}, GridAxis{-8.0, 8.0, 64}}};
    GridState t{offset, std::vector<Complex>(offset.size()), 0.0, units};
    CHECK_THROWS_AS(apply_conditional_shift(t, ShiftDirection::forward), GridMismatchError);
  }
}

TEST_CASE("checkpoint round trip", "[grid]") {
  const Units units;
  auto s = make_gaussian(GridSpec::square(-8.0, 8.0, 64), {{1.0, 0.5, 0.7}, {-1.0, 0.2, 0.6}}, units);
  s.time = 0.625;
  const auto path = (std::filesystem::temp_directory_path() / "qframes_test.qfgrid").string();
  write_checkpoint(s, path);
  const auto back = read_checkpoint(path, units);
  std::filesystem::remove(path);
  CHECK(back.time == s.time);
  CHECK(back.spec.shape() == s.spec.shape());
  CHECK(back.spec.axes[0].min == s.spec.axes[0].min);
  double worst = 0.0;
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i) worst = std::max(worst, std::abs(back.amplitudes[i] - s.amplitudes[i]));
  CHECK(worst < 1e-6);
  CHECK_THROWS_AS(read_checkpoint(path, units), GridMismatchError);
}

TEST_CASE("expectations are invariant under a closed cycle", "[grid]") {
  const Units units;
  const auto spec = GridSpec::line(-32.0, 32.0, 1024);  // spacing 1/16
  const auto s = make_gaussian(spec, 0.5, 0.25, 1.0, units);
  SECTION("empty cycle") {
    const auto r = cyclic_expectation_invariance({}, s, Observable::position(), q(0));
    CHECK(r.before == r.after);
    CHECK(r.composed.is_identity());
  }
  SECTION("Bargmann cycle with a = 16 cells, v t = 8 cells") {
    const auto factors = bargmann_factors(q(1), q(1), q(1), units);
    for (const auto& obs : {Observable::position(), Observable::momentum_squared()}) {
      const auto r = cyclic_expectation_invariance(factors, s, obs, q(1, 2));
      CHECK(std::abs(r.after - r.before) < 1e-10);
    }
    const auto r = cyclic_expectation_invariance(factors, s, Observable::position(), q(1, 2));
    CHECK(r.composed.is_cyclic());
    // the transformed state is e^{-i phi} psi with phi = a v m / hbar
    const Complex ov = overlap(s, r.transformed);
    CHECK(std::abs(ov - std::polar(1.0, -1.0)) < 1e-10);
  }
  SECTION("an open product is rejected") {
    auto factors = bargmann_factors(q(1), q(1), q(1), units);
    factors.pop_back();
    CHECK_THROWS_AS(cyclic_expectation_invariance(factors, s, Observable::position(), q(1, 2)), NonCyclicError);
  }
}
