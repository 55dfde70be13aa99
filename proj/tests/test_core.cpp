#include <random>

#include <catch_amalgamated.hpp>

#include "qframes/core.hpp"
#include "qframes/series.hpp"

using namespace qframes;

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

Polynomial random_polynomial(std::mt19937_64& rng, int max_degree) {
  std::uniform_int_distribution<long> num(-9, 9), den(1, 7), deg(0, max_degree);
  std::vector<Rational> c(static_cast<std::size_t>(deg(rng)) + 1);
  for (auto& v : c) v = make_rational(num(rng), den(rng));
  return Polynomial(std::move(c));
}

}  // namespace

TEST_CASE("rational parsing", "[rational]") {
  CHECK(parse_rational("3") == 3);
  CHECK(parse_rational("-7/4") == q(-7, 4));
  CHECK(parse_rational("6/8") == q(3, 4));
  CHECK(parse_rational("0") == 0);
  CHECK_THROWS_AS(parse_rational("1/0"), ConfigError);
  CHECK_THROWS_AS(parse_rational("0.5"), ConfigError);
  CHECK_THROWS_AS(parse_rational(""), ConfigError);
  CHECK_THROWS_AS(parse_rational("1/ 2"), ConfigError);
  CHECK_THROWS_AS(parse_rational("abc"), ConfigError);
}

TEST_CASE("polynomial calculus", "[polynomial]") {
  const Polynomial p{q(1), q(-2), q(3)};  // 1 - 2t + 3t^2
  CHECK(p.degree() == 2);
  CHECK(p(q(2)) == 9);
  CHECK(p.derivative() == Polynomial{q(-2), q(6)});
  CHECK(p.integral() == Polynomial{q(0), q(1), q(-1), q(1)});
  CHECK(p.integral()(q(0)) == 0);
  CHECK((p - p).is_zero());
  CHECK((p * Polynomial{q(0), q(1)}).degree() == 3);
  CHECK(Polynomial{q(0), q(0)}.is_zero());
  CHECK(p.evaluate(0.5) == Catch::Approx(0.75));

  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    const auto a = random_polynomial(rng, 4);
    const auto b = random_polynomial(rng, 4);
    CHECK((a * b).derivative() == a.derivative() * b + a * b.derivative());
    CHECK(a.integral().derivative() == a);
  }
}

TEST_CASE("trajectory_eval", "[core]") {
  SECTION("zero trajectory") {
    const auto v = trajectory_eval(FrameTrajectory{}, q(5));
    CHECK(v.position == 0);
    CHECK(v.velocity == 0);
    CHECK(v.acceleration == 0);
    CHECK(v.velocity_squared_integral == 0);
  }
  SECTION("uniform motion, v = 3, t = 2") {
    const auto v = trajectory_eval(FrameTrajectory::uniform(q(3)), q(2));
    CHECK(v.position == 6);
    CHECK(v.velocity == 3);
    CHECK(v.acceleration == 0);
    CHECK(v.velocity_squared_integral == 18);
  }
  SECTION("uniform acceleration, g = 2, t = 1") {
    const auto v = trajectory_eval(FrameTrajectory::uniformly_accelerated(q(2)), q(1));
    CHECK(v.position == 1);
    CHECK(v.velocity == 2);
    CHECK(v.acceleration == 2);
    CHECK(v.velocity_squared_integral == q(4, 3));
  }
}

TEST_CASE("action integral differentiates to the squared velocity", "[core][property]") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    const FrameTrajectory x(random_polynomial(rng, 5));
    CHECK(x.action_integral().derivative() == x.velocity() * x.velocity());
    CHECK(x.action_integral()(q(0)) == 0);
  }
}

TEST_CASE("units and particles", "[core]") {
  CHECK(Units{}.hbar == 1);
  CHECK_THROWS_AS(Units{q(0)}, ConfigError);
  CHECK_THROWS_AS(Units{q(-1)}, ConfigError);
  CHECK_THROWS_AS(ParticleSpec("P", q(0)), ConfigError);
  CHECK(ParticleSpec("P", q(3, 2)).mass == q(3, 2));
}

TEST_CASE("symplectic form", "[core]") {
  SECTION("one pair") { CHECK(symplectic_form(1) == RationalMatrix::from_rows({{0, 1}, {-1, 0}})); }
  SECTION("two pairs are block diagonal") {
    const auto j = symplectic_form(2);
    CHECK(j == RationalMatrix::from_rows({{0, 1, 0, 0}, {-1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}}));
  }
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto j = symplectic_form(n);
    CHECK(j.transpose() == -j);
    CHECK(j * j == -RationalMatrix::identity(2 * n));
    CHECK(j * j.transpose() == RationalMatrix::identity(2 * n));
  }
}

TEST_CASE("coordinate systems", "[core]") {
  const CoordinateSystem cs({{"S", "X", "P"}, {"P", "x", "p"}});
  CHECK(cs.dimension() == 4);
  CHECK(cs.particles() == 2);
  CHECK(cs.axis("x") == 2);
  CHECK(cs.axis_name(3) == "p");
  CHECK(cs.is_position(0));
  CHECK_FALSE(cs.is_position(1));
  CHECK_THROWS_AS(cs.axis("y"), DimensionError);
  CHECK(symplectic_form(cs) == symplectic_form(2));
}

TEST_CASE("rational matrix", "[matrix]") {
  const auto a = RationalMatrix::from_rows({{2, 1}, {1, 1}});
  const auto inv = a.inverse();
  REQUIRE(inv);
  CHECK(a * *inv == RationalMatrix::identity(2));
  CHECK(a.determinant() == 1);
  CHECK_FALSE(RationalMatrix::from_rows({{1, 2}, {2, 4}}).inverse());
  CHECK(RationalMatrix::from_rows({{1, 2}, {2, 4}}).determinant() == 0);
  CHECK(a.is_symmetric());
}

TEST_CASE("finite differences", "[series]") {
  const double dt = 0.1;
  std::vector<double> quad, cubic;
  for (int k = 0; k <= 10; ++k) {
    const double t = k * dt;
    quad.push_back(3.0 - 2.0 * t * t);
    cubic.push_back(t * t * t);
  }
  CHECK(fd_acceleration(quad, dt).value == Catch::Approx(-4.0).margin(1e-10));
  CHECK(fd_acceleration(cubic, dt).value == Catch::Approx(6.0 * 0.5).margin(1e-10));
  CHECK(fd_velocity(cubic, dt).value == Catch::Approx(3.0 * 0.25).margin(1e-10));
  const std::vector<double> short_series{1.0, 2.0, 3.0, 4.0};
  CHECK_THROWS_AS(fd_acceleration(short_series, dt), InsufficientSamplesError);
}
