#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "polynomial.hpp"
#include "rational.hpp"

namespace qframes {

/// Action units. One instance is threaded through a run; hbar defaults to 1.
struct Units {
  Rational hbar{1};

  Units() = default;
  explicit Units(Rational h) : hbar(std::move(h)) {
    if (hbar <= 0) throw ConfigError("hbar must be positive");
  }
  double hbar_value() const { return hbar.get_d(); }
};

struct ParticleSpec {
  std::string label;
  Rational mass;

  ParticleSpec(std::string l, Rational m) : label(std::move(l)), mass(std::move(m)) {
    if (mass <= 0) throw ConfigError("particle '" + label + "' must have positive mass");
  }
};

/// Frame position X(t) as a polynomial in t.
struct FrameTrajectory {
  Polynomial position;

  FrameTrajectory() = default;
  explicit FrameTrajectory(Polynomial p) : position(std::move(p)) {}

  static FrameTrajectory constant(const Rational& a) { return FrameTrajectory(Polynomial{a}); }
  static FrameTrajectory uniform(const Rational& v) { return FrameTrajectory(Polynomial{Rational(0), v}); }
  /// X(t) = g t^2 / 2
  static FrameTrajectory uniformly_accelerated(const Rational& g) {
    return FrameTrajectory(Polynomial{Rational(0), Rational(0), g / 2});
  }

  Polynomial velocity() const { return position.derivative(); }
  Polynomial acceleration() const { return position.derivative().derivative(); }
  /// t -> integral from 0 to t of Xdot^2.
  Polynomial action_integral() const {
    const Polynomial v = velocity();
    return (v * v).integral();
  }
};

struct TrajectoryValues {
  Rational position;
  Rational velocity;
  Rational acceleration;
  Rational velocity_squared_integral;
};

inline TrajectoryValues trajectory_eval(const FrameTrajectory& traj, const Rational& t) {
  return {traj.position(t), traj.velocity()(t), traj.acceleration()(t), traj.action_integral()(t)};
}

enum class AxisKind { position, momentum };

/// Ordered phase-space labelling (x_1, p_1, ..., x_N, p_N).
class CoordinateSystem {
 public:
  struct Pair {
    std::string particle;
    std::string position;
    std::string momentum;
  };

  CoordinateSystem() = default;
  explicit CoordinateSystem(std::vector<Pair> pairs) : pairs_(std::move(pairs)) {}

  std::size_t particles() const { return pairs_.size(); }
  std::size_t dimension() const { return 2 * pairs_.size(); }
  const std::vector<Pair>& pairs() const { return pairs_; }

  static std::size_t index(std::size_t particle, AxisKind kind) {
    return 2 * particle + (kind == AxisKind::momentum ? 1 : 0);
  }

  std::size_t particle_index(const std::string& label) const {
    for (std::size_t k = 0; k < pairs_.size(); ++k)
      if (pairs_[k].particle == label) return k;
    throw DimensionError("no particle '" + label + "' in coordinate system");
  }

  /// Looks up an axis by its display name (e.g. "x'" or "P2").
  std::size_t axis(const std::string& name) const {
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      if (pairs_[k].position == name) return 2 * k;
      if (pairs_[k].momentum == name) return 2 * k + 1;
    }
    throw DimensionError("no axis '" + name + "' in coordinate system");
  }

  const std::string& axis_name(std::size_t i) const {
    const Pair& p = pairs_.at(i / 2);
    return i % 2 == 0 ? p.position : p.momentum;
  }

  static bool is_position(std::size_t i) { return i % 2 == 0; }

  friend bool operator==(const CoordinateSystem& a, const CoordinateSystem& b) {
    if (a.pairs_.size() != b.pairs_.size()) return false;
    for (std::size_t k = 0; k < a.pairs_.size(); ++k) {
      if (a.pairs_[k].particle != b.pairs_[k].particle || a.pairs_[k].position != b.pairs_[k].position ||
          a.pairs_[k].momentum != b.pairs_[k].momentum)
        return false;
    }
    return true;
  }
  friend bool operator!=(const CoordinateSystem& a, const CoordinateSystem& b) { return !(a == b); }

 private:
  std::vector<Pair> pairs_;
};

/// Builds a coordinate system where particle k has axes ("x_k", "p_k") named
/// after its label, e.g. label "1" -> ("x1", "p1").
inline CoordinateSystem coordinates_for(const std::vector<ParticleSpec>& particles) {
  std::vector<CoordinateSystem::Pair> pairs;
  for (const auto& p : particles) pairs.push_back({p.label, "x" + p.label, "p" + p.label});
  return CoordinateSystem(std::move(pairs));
}

/// Canonical form J with [r_i, r_j] = i hbar J_ij.
inline RationalMatrix symplectic_form(std::size_t particles) {
  RationalMatrix j(2 * particles, 2 * particles);
  for (std::size_t k = 0; k < particles; ++k) {
    j(2 * k, 2 * k + 1) = 1;
    j(2 * k + 1, 2 * k) = -1;
  }
  return j;
}

inline RationalMatrix symplectic_form(const CoordinateSystem& cs) { return symplectic_form(cs.particles()); }

}  // namespace qframes
