#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"

namespace qframes {

/// Displacement-type unitary in the fixed normal order
///
///   U = e^{i phase(t)} e^{-i shift(t) p / hbar} e^{i kick(t) x / hbar}.
///
/// Passively it maps x -> x - shift, p -> p - kick.
struct WeylElement {
  Polynomial shift;
  Polynomial kick;
  Polynomial phase;  // radians, never reduced mod 2 pi
  std::optional<std::string> mass_tag;

  static WeylElement identity() { return {}; }
  static WeylElement translation(const Polynomial& x) { return {x, {}, {}, std::nullopt}; }

  bool is_identity() const { return shift.is_zero() && kick.is_zero() && phase.is_zero(); }
  bool is_cyclic() const { return shift.is_zero() && kick.is_zero(); }

  friend bool operator==(const WeylElement& a, const WeylElement& b) {
    return a.shift == b.shift && a.kick == b.kick && a.phase == b.phase;
  }
};

/// G_X for mass m: shift X, kick m Xdot, phase (m / 2 hbar) int_0^t Xdot^2.
/// A zero mass is allowed here (pure translation family).
inline WeylElement galilei_element(const Rational& mass, const FrameTrajectory& traj, const Units& units) {
  WeylElement u;
  u.shift = traj.position;
  u.kick = traj.velocity() * mass;
  u.phase = traj.action_integral() * Rational(mass / (2 * units.hbar));
  return u;
}

inline WeylElement weyl_from_trajectory(const ParticleSpec& particle, const FrameTrajectory& traj, const Units& units) {
  WeylElement u = galilei_element(particle.mass, traj, units);
  u.mass_tag = particle.label;
  return u;
}

/// Operator product U2 U1 brought back to normal order. Moving the kick of U2
/// past the shift of U1 costs e^{i K2 X1 / hbar}.
inline WeylElement compose(const WeylElement& u2, const WeylElement& u1, const Units& units) {
  WeylElement out;
  out.shift = u1.shift + u2.shift;
  out.kick = u1.kick + u2.kick;
  out.phase = u1.phase + u2.phase + (u2.kick * u1.shift) / units.hbar;
  if (u1.mass_tag == u2.mass_tag) out.mass_tag = u1.mass_tag;
  return out;
}

inline WeylElement inverse(const WeylElement& u, const Units& units) {
  WeylElement out;
  out.shift = -u.shift;
  out.kick = -u.kick;
  out.phase = -u.phase + (u.kick * u.shift) / units.hbar;
  out.mass_tag = u.mass_tag;
  return out;
}

/// Product elements[0] * elements[1] * ... * elements[n-1]; the last entry acts first.
inline WeylElement product(const std::vector<WeylElement>& elements, const Units& units) {
  WeylElement acc = WeylElement::identity();
  for (auto it = elements.rbegin(); it != elements.rend(); ++it) acc = compose(*it, acc, units);
  if (!elements.empty()) acc.mass_tag = elements.front().mass_tag;
  for (const auto& e : elements)
    if (e.mass_tag != acc.mass_tag) acc.mass_tag.reset();
  return acc;
}

inline void require_cyclic(const WeylElement& u) {
  if (!u.is_cyclic()) {
    throw NonCyclicError("product is not cyclic: net shift " + u.shift.to_string() + ", net kick " +
                         u.kick.to_string());
  }
}

/// theta(X) = (m / 2 hbar) int_0^t Xdot^2 as a polynomial in t.
inline Polynomial theta(const Rational& mass, const FrameTrajectory& traj, const Units& units) {
  return traj.action_integral() * Rational(mass / (2 * units.hbar));
}

/// Theta_m(X1, X2) = theta(X1) + theta(X2) - theta(X1 + X2) + m X1 X2dot / hbar.
inline Polynomial composition_phase(const Rational& mass, const FrameTrajectory& x1, const FrameTrajectory& x2,
                                    const Units& units) {
  const FrameTrajectory sum(x1.position + x2.position);
  return theta(mass, x1, units) + theta(mass, x2, units) - theta(mass, sum, units) +
         (x1.position * x2.velocity()) * Rational(mass / units.hbar);
}

/// The four factors G_{-vt}, G_{-a}, G_{vt}, G_a in product order.
inline std::vector<WeylElement> bargmann_factors(const Rational& a, const Rational& v, const Rational& mass,
                                                 const Units& units) {
  return {galilei_element(mass, FrameTrajectory::uniform(-v), units),
          galilei_element(mass, FrameTrajectory::constant(-a), units),
          galilei_element(mass, FrameTrajectory::uniform(v), units),
          galilei_element(mass, FrameTrajectory::constant(a), units)};
}

/// Net scalar phase of G_c = G_{-vt} G_{-a} G_{vt} G_a.
inline Rational bargmann_cycle(const Rational& a, const Rational& v, const Rational& mass, const Units& units) {
  const WeylElement gc = product(bargmann_factors(a, v, mass, units), units);
  require_cyclic(gc);
  if (!gc.phase.is_constant()) throw NonCyclicError("cycle phase depends on t: " + gc.phase.to_string());
  return gc.phase.coefficient(0);
}

inline Rational mass_superposition_relative_phase(const Rational& a, const Rational& v, const Rational& m1,
                                                  const Rational& m2, const Units& units) {
  return bargmann_cycle(a, v, m2, units) - bargmann_cycle(a, v, m1, units);
}

/// Reduces an exact phase into [0, 2 pi) for reporting.
inline double reduce_phase(const Rational& phase) {
  double r = std::fmod(phase.get_d(), 2.0 * std::numbers::pi);
  if (r < 0) r += 2.0 * std::numbers::pi;
  return r;
}

struct CycleReport {
  Rational net_shift;
  Rational net_kick;
  Rational global_phase;
  std::map<Rational, Rational> per_mass_phases;

  bool cyclic() const { return net_shift == 0 && net_kick == 0; }
};

/// Runs the Bargmann cycle once per mass channel. global_phase holds the
/// phase of the first channel.
inline CycleReport bargmann_report(const Rational& a, const Rational& v, const std::vector<Rational>& masses,
                                   const Units& units) {
  CycleReport report;
  for (const auto& m : masses) {
    const WeylElement gc = product(bargmann_factors(a, v, m, units), units);
    require_cyclic(gc);
    report.per_mass_phases[m] = gc.phase.coefficient(0);
  }
  if (!masses.empty()) report.global_phase = report.per_mass_phases.at(masses.front());
  return report;
}

}  // namespace qframes
