#pragma once

#include <string>
#include <vector>

#include "frames.hpp"

namespace qframes::models {

/// Linear potential V(y) = slope * y; slope = -M g gives a uniform field.
struct LinearField {
  Rational slope{0};
};

inline std::vector<ParticleSpec> one_body(const Rational& m) { return {ParticleSpec("P", m)}; }

inline std::vector<ParticleSpec> two_body(const Rational& frame_mass, const Rational& m) {
  return {ParticleSpec("S", frame_mass), ParticleSpec("P", m)};
}

inline std::vector<ParticleSpec> three_body(const Rational& m1, const Rational& m2, const Rational& m) {
  return {ParticleSpec("S1", m1), ParticleSpec("S2", m2), ParticleSpec("P", m)};
}

inline QuadraticHamiltonian free_particle(const Rational& m) {
  QuadraticHamiltonian h(standard_coordinates(one_body(m)));
  h.add_kinetic(1, m);
  return h;
}

/// P^2/2M + V(X) + p^2/2m in lab coordinates (X, P, x, p).
inline QuadraticHamiltonian frame_and_particle(const Rational& frame_mass, const Rational& m, const LinearField& v) {
  QuadraticHamiltonian h(standard_coordinates(two_body(frame_mass, m)));
  h.add_kinetic(1, frame_mass).add_kinetic(3, m);
  if (v.slope != 0) h.add_potential(Potential::linear("V", {1, 0, 0, 0}, v.slope));
  return h;
}

/// P1^2/2M1 + V(X2 - X1) + P2^2/2M2 + p^2/2m in lab coordinates.
inline QuadraticHamiltonian two_frames_and_particle(const Rational& m1, const Rational& m2, const Rational& m,
                                                    const LinearField& v) {
  QuadraticHamiltonian h(standard_coordinates(three_body(m1, m2, m)));
  h.add_kinetic(1, m1).add_kinetic(3, m2).add_kinetic(5, m);
  if (v.slope != 0) h.add_potential(Potential::linear("V", {-1, 0, 1, 0, 0, 0}, v.slope));
  return h;
}

// Closed forms of the frame-transformed Hamiltonians, written directly from
// the derived masses. They serve as the independent route against
// conjugate_hamiltonian.

/// P'^2/2M + V(X') + p'^2/2mu - P'p'/M.
inline QuadraticHamiltonian aharonov_kaufherr_form(const Rational& frame_mass, const Rational& m, const LinearField& v) {
  const Rational mu = reduced_mass(frame_mass, m);
  QuadraticHamiltonian h(standard_coordinates(two_body(frame_mass, m), "'"));
  h.add_kinetic(1, frame_mass).add_kinetic(3, mu).add_quadratic(1, 3, Rational(-1 / frame_mass));
  if (v.slope != 0) h.add_potential(Potential::linear("V", {1, 0, 0, 0}, v.slope));
  return h;
}

/// P'^2/2M_T + V(X' - m x'/M_T) + p'^2/2mu.
inline QuadraticHamiltonian relative_cm_form(const Rational& frame_mass, const Rational& m, const LinearField& v) {
  const Rational total = frame_mass + m;
  const Rational mu = reduced_mass(frame_mass, m);
  QuadraticHamiltonian h(standard_coordinates(two_body(frame_mass, m), "'"));
  h.add_kinetic(1, total).add_kinetic(3, mu);
  if (v.slope != 0) h.add_potential(Potential::linear("V", {1, 0, Rational(-m / total), 0}, v.slope));
  return h;
}

/// P1'^2/2M_T + V(X2') + P2'^2/2mu2 + p'^2/2mu + P2'p'/M1.
inline QuadraticHamiltonian set1_form(const Rational& m1, const Rational& m2, const Rational& m, const LinearField& v) {
  const auto dm = DerivedMasses::from(m, m1, m2);
  QuadraticHamiltonian h(standard_coordinates(three_body(m1, m2, m), "'"));
  h.add_kinetic(1, dm.total).add_kinetic(3, dm.mu2).add_kinetic(5, dm.mu).add_quadratic(3, 5, Rational(1 / m1));
  if (v.slope != 0) h.add_potential(Potential::linear("V", {0, 0, 1, 0, 0, 0}, v.slope));
  return h;
}

/// P1'^2/2M_T + V(X2' + mu x'/M1) + gamma (P2'^2/2mu2 + p'^2/2mu - P2'p'/M1).
inline QuadraticHamiltonian set2_form(const Rational& m1, const Rational& m2, const Rational& m, const LinearField& v) {
  const auto dm = DerivedMasses::from(m, m1, m2);
  QuadraticHamiltonian h(standard_coordinates(three_body(m1, m2, m), "'"));
  h.add_kinetic(1, dm.total)
      .add_quadratic(3, 3, Rational(dm.gamma / (2 * dm.mu2)))
      .add_quadratic(5, 5, Rational(dm.gamma / (2 * dm.mu)))
      .add_quadratic(3, 5, Rational(-dm.gamma / m1));
  if (v.slope != 0) h.add_potential(Potential::linear("V", {0, 0, 1, 0, Rational(dm.mu / m1), 0}, v.slope));
  return h;
}

/// P1''^2/2M_T + P2''^2/2mu2' + V(X2'' - m x''/(m + M2)) + p''^2/2mu'.
inline QuadraticHamiltonian double_boost_form(const Rational& m1, const Rational& m2, const Rational& m,
                                              const LinearField& v) {
  const auto dm = DerivedMasses::from(m, m1, m2);
  QuadraticHamiltonian h(standard_coordinates(three_body(m1, m2, m), "''"));
  h.add_kinetic(1, dm.total).add_kinetic(3, dm.mu2_prime).add_kinetic(5, dm.mu_prime);
  if (v.slope != 0) h.add_potential(Potential::linear("V", {0, 0, 1, 0, Rational(-m / (m + m2)), 0}, v.slope));
  return h;
}

/// Exact structural comparison of two Hamiltonians (generic potentials
/// compare by name and argument only).
inline bool same_coefficients(const QuadraticHamiltonian& a, const QuadraticHamiltonian& b) {
  if (a.coordinates != b.coordinates || a.quadratic != b.quadratic || a.linear != b.linear || a.scalar != b.scalar ||
      a.potentials.size() != b.potentials.size())
    return false;
  for (std::size_t k = 0; k < a.potentials.size(); ++k) {
    const auto& p = a.potentials[k];
    const auto& q = b.potentials[k];
    if (p.kind != q.kind || p.direction != q.direction || p.offset != q.offset) return false;
    if (p.kind == Potential::Kind::linear ? p.slope != q.slope : p.name != q.name) return false;
  }
  return true;
}

}  // namespace qframes::models
