#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <catch_amalgamated.hpp>

#include "qframes/gaussian.hpp"

using namespace qframes;
using models::LinearField;

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("free packet follows the closed-form spreading law", "[gaussian]") {
  const Units units{q(1, 2)};
  const double hbar = 0.5, m = 2.0, x0 = 1.0, p0 = 3.0, sigma = 0.5;
  const auto h = models::free_particle(q(2));
  const auto s0 = product_state(h.coordinates, {{x0, p0, sigma}}, units);
  const auto traj = evolve(s0, h, 2.0, {0.25});
  REQUIRE(traj.size() == 9);
  const double spp = hbar * hbar / (4 * sigma * sigma);
  for (const auto& s : traj) {
    const double t = s.time;
    CHECK(std::abs(s.mean(0) - (x0 + p0 * t / m)) < 1e-12);
    CHECK(std::abs(s.mean(1) - p0) < 1e-12);
    CHECK(std::abs(s.covariance(0, 0) - (sigma * sigma + spp * t * t / (m * m))) < 1e-12);
    CHECK(std::abs(s.covariance(0, 1) - spp * t / m) < 1e-12);
    CHECK(std::abs(s.covariance(1, 1) - spp) < 1e-12);
    CHECK(uncertainty_margin(s, units) >= -1e-10);
  }
  CHECK(traj.back().time == 2.0);
}

TEST_CASE("accelerated frame: every gauge reads -g", "[gaussian]") {
  const Units units;
  const Rational m = q(3), g = q(2);
  const auto traj_frame = FrameTrajectory::uniformly_accelerated(g);
  for (const Rational& alpha : {q(0), q(1, 2), q(1)}) {
    const auto h = alpha_hamiltonian(m, traj_frame, alpha);
    const auto s0 = product_state(h.coordinates, {{0.5, -1.0, 1.0}}, units);
    const auto traj = evolve(s0, h, 1.0, {0.05, 1e-3});
    const auto est = gaussian_acceleration(traj, h, 0);
    CHECK(est.symbolic == -2.0);
    CHECK(std::abs(est.numeric.value + 2.0) < 1e-8);
    for (const auto& s : traj) CHECK(uncertainty_margin(s, units) >= -1e-10);
  }
  SECTION("RK4 path agrees with the closed form") {
    const auto h = alpha_hamiltonian(m, traj_frame, q(1));
    const auto s0 = product_state(h.coordinates, {{0.5, -1.0, 1.0}}, units);
    const auto traj = evolve(s0, h, 1.0, {0.1, 1e-3});
    for (const auto& s : traj) {
      const double t = s.time;
      CHECK(std::abs(s.mean(0) - (0.5 - t / 3.0 - t * t)) < 1e-10);
      CHECK(std::abs(s.mean(1) + 1.0) < 1e-12);
    }
  }
  SECTION("exponential path agrees with the closed form") {
    const auto h = alpha_hamiltonian(m, traj_frame, q(0));
    const auto s0 = product_state(h.coordinates, {{0.5, -1.0, 1.0}}, units);
    const auto traj = evolve(s0, h, 1.0, {0.1});
    for (const auto& s : traj) {
      const double t = s.time;
      // p'(t) = p0 - m g t
      CHECK(std::abs(s.mean(1) - (-1.0 - 6.0 * t)) < 1e-12);
      CHECK(std::abs(s.mean(0) - (0.5 - t / 3.0 - t * t)) < 1e-12);
    }
  }
}

TEST_CASE("no field leaves the frame-relative motion unaccelerated", "[gaussian]") {
  const Units units;
  const auto h = conjugate_hamiltonian(models::frame_and_particle(q(3), q(1), {}),
                                       builtin_map(BuiltinMap::aharonov_kaufherr, models::two_body(q(3), q(1))));
  const auto s0 = product_state(h.coordinates, {{0.0, 1.0, 1.0}, {2.0, -0.5, 0.7}}, units);
  const auto traj = evolve(s0, h, 1.0, {0.1});
  const auto est = gaussian_acceleration(traj, h, 2);
  CHECK(est.form.is_constant());
  CHECK(est.symbolic == 0.0);
  CHECK(std::abs(est.numeric.value) < 1e-10);
}

TEST_CASE("moment transport", "[gaussian]") {
  const Units units;
  const auto particles = models::two_body(q(3), q(1));
  const auto lab = models::frame_and_particle(q(3), q(1), {q(-3)});
  const auto s0 = product_state(lab.coordinates, {{1.0, 0.5, 0.8}, {-2.0, 1.5, 1.3}}, units);

  SECTION("identity map") {
    const auto out = map_state(s0, identity_map(lab.coordinates));
    CHECK(out.mean == s0.mean);
    CHECK(out.covariance == s0.covariance);
  }
  SECTION("inverse round trip") {
    const auto map = builtin_map(BuiltinMap::relative_cm, particles);
    const auto back = map_state(map_state(s0, map), inverse_map(map));
    CHECK(max_abs(back.mean - s0.mean) < 1e-12);
    CHECK(max_abs(back.covariance - s0.covariance) < 1e-12);
  }
  SECTION("relative coordinate of the means") {
    const auto out = map_state(s0, builtin_map(BuiltinMap::relative_cm, particles));
    CHECK(std::abs(out.mean(2) - (s0.mean(2) - s0.mean(0))) < 1e-15);
    CHECK(std::abs(out.mean(1) - (s0.mean(1) + s0.mean(3))) < 1e-15);
    CHECK(out.coordinates.axis_name(2) == "x'");
  }
  SECTION("canonical maps keep the state physical") {
    const auto three = models::three_body(q(2), q(5), q(1));
    const auto lab3 = models::two_frames_and_particle(q(2), q(5), q(1), {q(1)});
    const auto s3 = product_state(lab3.coordinates, {{0.0, 0.0, 1.0}, {3.0, 0.0, 0.5}, {1.0, 1.0, 2.0}}, units);
    for (auto which : {BuiltinMap::set1, BuiltinMap::set2}) {
      const auto out = map_state(s3, builtin_map(which, three));
      CHECK(is_positive_definite(out.covariance));
      CHECK(uncertainty_margin(out, units) >= -1e-10);
    }
  }
  SECTION("evolving then mapping equals mapping then evolving") {
    for (auto which : {BuiltinMap::aharonov_kaufherr, BuiltinMap::relative_cm}) {
      const auto map = builtin_map(which, particles);
      const auto h = conjugate_hamiltonian(lab, map);
      const auto a = evolve(s0, lab, 2.0, {0.2});
      const auto b = evolve(map_state(s0, map), h, 2.0, {0.2});
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        const auto mapped = map_state(a[k], map);
        CHECK(max_abs(mapped.mean - b[k].mean) < 1e-9);
        CHECK(max_abs(mapped.covariance - b[k].covariance) < 1e-9);
      }
    }
  }
  SECTION("dimension mismatch") {
    CHECK_THROWS_AS(map_state(s0, identity_map(standard_coordinates(models::one_body(q(1))))), DimensionError);
  }
}

TEST_CASE("uncertainty relation holds along random trajectories", "[gaussian][property]") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), width(0.3, 2.0);
  const Units units{q(1, 3)};
  for (int k = 0; k < 20; ++k) {
    const auto h = models::two_frames_and_particle(q(1 + k % 3), q(2), q(1, 2), {q(k - 10, 3)});
    const auto s0 = product_state(h.coordinates,
                                  {{pos(rng), pos(rng), width(rng)}, {pos(rng), pos(rng), width(rng)},
                                   {pos(rng), pos(rng), width(rng)}},
                                  units);
    for (const auto& s : evolve(s0, h, 1.0, {0.25})) CHECK(uncertainty_margin(s, units) >= -1e-10);
  }
}

TEST_CASE("double boost", "[gaussian]") {
  const Units units;
  const CoordinateSystem cs({{"S2'", "X2'", "P2'"}, {"P'", "x'", "p'"}});
  const auto s0 = product_state(cs, {{2.0, 0.0, 0.5}, {1.0, 0.3, 0.8}}, units);
  SECTION("unit masses in a unit field") {
    const auto r = double_boost_check(q(1), q(1), q(1), {q(1)}, s0, 1.0, {0.05});
    CHECK(r.expected_first == -1.0);
    CHECK(r.expected_second == 1.0);
    CHECK(r.first_frame.symbolic == -1.0);
    CHECK(r.second_frame.symbolic == 1.0);
    CHECK(std::abs(r.first_frame.numeric.value + 1.0) < 1e-9);
    CHECK(std::abs(r.second_frame.numeric.value - 1.0) < 1e-9);
    CHECK(r.transport_mismatch < 1e-9);
    // mu2' = 2/3 and mu' = 1/2
    CHECK(r.second_hamiltonian.monomial(1, 1) == q(3, 4));
    CHECK(r.second_hamiltonian.monomial(3, 3) == 1);
    CHECK(r.second_hamiltonian.monomial(1, 3) == 0);
  }
  SECTION("no field: both readings vanish") {
    const auto r = double_boost_check(q(2), q(3), q(1), {}, s0, 1.0, {0.05});
    CHECK(r.expected_first == 0.0);
    CHECK(r.expected_second == 0.0);
    CHECK(std::abs(r.first_frame.numeric.value) < 1e-12);
    CHECK(std::abs(r.second_frame.numeric.value) < 1e-12);
  }
  SECTION("wrong state dimension") {
    const auto s = product_state(standard_coordinates(models::one_body(q(1))), {{0.0, 0.0, 1.0}}, units);
    CHECK_THROWS_AS(double_boost_check(q(1), q(1), q(1), {}, s, 1.0), DimensionError);
  }
}

TEST_CASE("Gaussian evolution rejects non-linear potentials", "[gaussian]") {
  const Units units;
  auto h = models::free_particle(q(1));
  h.add_potential(Potential::generic("quartic", {1, 0}, [](double y) { return y * y * y * y; }));
  const auto s0 = product_state(h.coordinates, {{0.0, 0.0, 1.0}}, units);
  CHECK_THROWS_AS(evolve(s0, h, 1.0), NonQuadraticError);
  CHECK_THROWS_AS(product_state(h.coordinates, {}, units), DimensionError);
}

TEST_CASE("trajectory CSV", "[gaussian]") {
  const Units units;
  const auto h = models::free_particle(q(1));
  const auto traj = evolve(product_state(h.coordinates, {{0.0, 1.0, 1.0}}, units), h, 0.5, {0.1});
  const auto path = std::filesystem::temp_directory_path() / "qframes_test_traj.csv";
  write_trajectory_csv(traj, path.string());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,mean_x,mean_p,cov_0_0,cov_0_1,cov_1_1");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == traj.size());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(write_trajectory_csv(traj, "/nonexistent-dir/x.csv"), ConfigError);
}
