#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hamiltonian.hpp"
#include "weyl.hpp"

namespace qframes {

/// r' = S r + d(t) between two labelled coordinate systems.
struct AffineFrameMap {
  std::string name;
  RationalMatrix linear;
  std::vector<Polynomial> offset;
  CoordinateSystem source;
  CoordinateSystem target;
  Rational jacobian{1};  // |det| of the position-position block

  std::size_t dimension() const { return linear.rows(); }

  bool time_independent() const {
    for (const auto& p : offset)
      if (!p.is_constant()) return false;
    return true;
  }

  RationalVector offset_at(const Rational& t) const {
    RationalVector out;
    out.reserve(offset.size());
    for (const auto& p : offset) out.push_back(p(t));
    return out;
  }

  /// Source-coordinate expansion of target axis i.
  RationalVector row(std::size_t i) const { return linear.row(i); }
};

/// Derived masses of the three-body problem (frames S1, S2, particle P).
struct DerivedMasses {
  Rational total;        // M_T = m + M1 + M2
  Rational mu;           // m M1 / (m + M1)
  Rational mu2;          // M1 M2 / (M1 + M2)
  Rational mu_prime;     // m M2 / (m + M2)
  Rational mu2_prime;    // M1 (m + M2) / (M1 + m + M2)
  Rational gamma;        // M1 M2 m / (M_T mu2 mu)

  static DerivedMasses from(const Rational& m, const Rational& m1, const Rational& m2) {
    DerivedMasses d;
    d.total = m + m1 + m2;
    d.mu = m * m1 / (m + m1);
    d.mu2 = m1 * m2 / (m1 + m2);
    d.mu_prime = m * m2 / (m + m2);
    d.mu2_prime = m1 * (m + m2) / (m1 + m + m2);
    d.gamma = m1 * m2 * m / (d.total * d.mu2 * d.mu);
    return d;
  }
};

inline Rational reduced_mass(const Rational& a, const Rational& b) { return a * b / (a + b); }

/// Conventional axis names: one particle (x, p); two (X, P), (x, p);
/// three (X1, P1), (X2, P2), (x, p).
inline CoordinateSystem standard_coordinates(const std::vector<ParticleSpec>& particles,
                                             const std::string& prime = "") {
  std::vector<CoordinateSystem::Pair> pairs;
  const std::size_t n = particles.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::string x, p;
    if (k + 1 == n) {
      x = "x";
      p = "p";
    } else if (n == 2) {
      x = "X";
      p = "P";
    } else {
      x = "X" + std::to_string(k + 1);
      p = "P" + std::to_string(k + 1);
    }
    pairs.push_back({particles[k].label + prime, x + prime, p + prime});
  }
  return CoordinateSystem(std::move(pairs));
}

inline CoordinateSystem primed(const CoordinateSystem& cs) {
  std::vector<CoordinateSystem::Pair> pairs;
  for (const auto& p : cs.pairs()) pairs.push_back({p.particle + "'", p.position + "'", p.momentum + "'"});
  return CoordinateSystem(std::move(pairs));
}

namespace detail {

inline Rational position_jacobian(const RationalMatrix& s) {
  const std::size_t n = s.rows() / 2;
  RationalMatrix block(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) block(i, j) = s(2 * i, 2 * j);
  return abs(block.determinant());
}

inline AffineFrameMap make_map(std::string name, RationalMatrix s, std::vector<Polynomial> d, CoordinateSystem source,
                               CoordinateSystem target) {
  AffineFrameMap m;
  m.name = std::move(name);
  m.jacobian = position_jacobian(s);
  m.linear = std::move(s);
  m.offset = std::move(d);
  m.source = std::move(source);
  m.target = std::move(target);
  return m;
}

inline RationalMatrix relative_cm_block(const Rational& frame_mass, const Rational& mass) {
  const Rational total = frame_mass + mass;
  const Rational mu = reduced_mass(frame_mass, mass);
  return RationalMatrix::from_rows({
      {frame_mass / total, 0, mass / total, 0},
      {0, 1, 0, 1},
      {-1, 0, 1, 0},
      {0, -mu / frame_mass, 0, mu / mass},
  });
}

}  // namespace detail

enum class BuiltinMap { shift_only, galilei_full, aharonov_kaufherr, relative_cm, set1, set2, double_boost };

inline std::string to_string(BuiltinMap m) {
  switch (m) {
    case BuiltinMap::shift_only: return "shift_only";
    case BuiltinMap::galilei_full: return "galilei_full";
    case BuiltinMap::aharonov_kaufherr: return "aharonov_kaufherr";
    case BuiltinMap::relative_cm: return "relative_cm";
    case BuiltinMap::set1: return "set1";
    case BuiltinMap::set2: return "set2";
    case BuiltinMap::double_boost: return "double_boost";
  }
  return "unknown";
}

inline std::size_t arity(BuiltinMap m) {
  switch (m) {
    case BuiltinMap::shift_only:
    case BuiltinMap::galilei_full: return 1;
    case BuiltinMap::aharonov_kaufherr:
    case BuiltinMap::relative_cm: return 2;
    default: return 3;
  }
}

/// Builds one of the named frame changes. Particle order: (P) for one-body
/// maps, (S, P) for two-body maps and (S1, S2, P) for three-body maps.
/// double_boost acts on the coordinates produced by set1 and leaves the
/// centre-of-mass pair alone.
inline AffineFrameMap builtin_map(BuiltinMap which, const std::vector<ParticleSpec>& particles,
                                  const std::optional<FrameTrajectory>& traj = std::nullopt) {
  if (particles.size() != arity(which)) {
    throw ArityError(to_string(which) + " needs " + std::to_string(arity(which)) + " particles, got " +
                     std::to_string(particles.size()));
  }
  const CoordinateSystem src = standard_coordinates(particles);
  const CoordinateSystem dst = standard_coordinates(particles, "'");
  const std::size_t dim = src.dimension();
  std::vector<Polynomial> zero(dim);

  switch (which) {
    case BuiltinMap::shift_only:
    case BuiltinMap::galilei_full: {
      if (!traj) throw MissingTrajectoryError(to_string(which) + " needs a frame trajectory");
      std::vector<Polynomial> d{-traj->position, Polynomial{}};
      if (which == BuiltinMap::galilei_full) d[1] = -(traj->velocity() * particles[0].mass);
      return detail::make_map(to_string(which), RationalMatrix::identity(2), std::move(d), src, dst);
    }
    case BuiltinMap::aharonov_kaufherr: {
      auto s = RationalMatrix::from_rows({{1, 0, 0, 0}, {0, 1, 0, 1}, {-1, 0, 1, 0}, {0, 0, 0, 1}});
      return detail::make_map(to_string(which), std::move(s), zero, src, dst);
    }
    case BuiltinMap::relative_cm: {
      auto s = detail::relative_cm_block(particles[0].mass, particles[1].mass);
      return detail::make_map(to_string(which), std::move(s), zero, src, dst);
    }
    case BuiltinMap::set1:
    case BuiltinMap::set2: {
      const Rational& m1 = particles[0].mass;
      const Rational& m2 = particles[1].mass;
      const Rational& m = particles[2].mass;
      const auto dm = DerivedMasses::from(m, m1, m2);
      const Rational& mt = dm.total;
      RationalMatrix s(6, 6);
      // centre of mass pair, shared by both sets
      s(0, 0) = m1 / mt;
      s(0, 2) = m2 / mt;
      s(0, 4) = m / mt;
      s(1, 1) = 1;
      s(1, 3) = 1;
      s(1, 5) = 1;
      if (which == BuiltinMap::set1) {
        s(2, 0) = -1;
        s(2, 2) = 1;
        s(3, 1) = -m2 / mt;
        s(3, 3) = 1 - m2 / mt;
        s(3, 5) = -m2 / mt;
        s(4, 0) = -1;
        s(4, 4) = 1;
        s(5, 1) = -m / mt;
        s(5, 3) = -m / mt;
        s(5, 5) = 1 - m / mt;
      } else {
        const Rational a = m2 / dm.mu2;
        s(2, 0) = -a * m1 / mt;
        s(2, 2) = a * (1 - m2 / mt);
        s(2, 4) = -a * m / mt;
        s(3, 1) = -dm.mu2 / m1;
        s(3, 3) = dm.mu2 / m2;
        const Rational b = m / dm.mu;
        s(4, 0) = -b * m1 / mt;
        s(4, 2) = -b * m2 / mt;
        s(4, 4) = b * (1 - m / mt);
        s(5, 1) = -dm.mu / m1;
        s(5, 5) = dm.mu / m;
      }
      return detail::make_map(to_string(which), std::move(s), zero, src, dst);
    }
    case BuiltinMap::double_boost: {
      const auto block = detail::relative_cm_block(particles[1].mass, particles[2].mass);
      RationalMatrix s(6, 6);
      s(0, 0) = 1;
      s(1, 1) = 1;
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) s(2 + i, 2 + j) = block(i, j);
      return detail::make_map(to_string(which), std::move(s), zero, dst, standard_coordinates(particles, "''"));
    }
  }
  throw ArityError("unknown builtin map");
}

inline AffineFrameMap identity_map(const CoordinateSystem& cs) {
  return detail::make_map("identity", RationalMatrix::identity(cs.dimension()),
                          std::vector<Polynomial>(cs.dimension()), cs, cs);
}

/// second after first: r'' = S2 (S1 r + d1) + d2.
inline AffineFrameMap compose_maps(const AffineFrameMap& second, const AffineFrameMap& first) {
  if (second.source != first.target) throw DimensionError("maps do not chain: " + second.name + " after " + first.name);
  std::vector<Polynomial> d(second.dimension());
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = second.offset[i];
    for (std::size_t j = 0; j < first.dimension(); ++j) d[i] += first.offset[j] * second.linear(i, j);
  }
  return detail::make_map(second.name + "*" + first.name, second.linear * first.linear, std::move(d), first.source,
                          second.target);
}

inline AffineFrameMap inverse_map(const AffineFrameMap& map) {
  auto inv = map.linear.inverse();
  if (!inv) throw SingularMapError("map '" + map.name + "' is not invertible");
  std::vector<Polynomial> d(map.dimension());
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) d[i] -= map.offset[j] * (*inv)(i, j);
  return detail::make_map("inverse(" + map.name + ")", std::move(*inv), std::move(d), map.target, map.source);
}

struct CanonicalCheck {
  bool canonical;
  RationalMatrix witness;  // S J S^T - J
};

inline CanonicalCheck check_canonical(const AffineFrameMap& map) {
  const RationalMatrix j = symplectic_form(map.dimension() / 2);
  RationalMatrix w = map.linear * j * map.linear.transpose() - j;
  const bool ok = w.is_zero();
  return {ok, std::move(w)};
}

/// [a, b] / (i hbar) for target axis row_a of map_a and row_b of map_b.
inline Rational mixed_commutator(const AffineFrameMap& map_a, std::size_t row_a, const AffineFrameMap& map_b,
                                 std::size_t row_b) {
  if (map_a.source != map_b.source) throw DimensionError("maps do not share a source coordinate system");
  const RationalMatrix j = symplectic_form(map_a.dimension() / 2);
  return dot(map_a.row(row_a), j * map_b.row(row_b));
}

/// Rewrites H in the target coordinates of a time-independent map.
inline QuadraticHamiltonian conjugate_hamiltonian(const QuadraticHamiltonian& h, const AffineFrameMap& map) {
  h.validate();
  if (h.dimension() != map.dimension()) throw DimensionError("Hamiltonian and map dimensions differ");
  if (!map.time_independent()) throw UnsupportedGeneratorError("map '" + map.name + "' depends on time");
  auto inv = map.linear.inverse();
  if (!inv) throw SingularMapError("map '" + map.name + "' is not invertible");
  const RationalMatrix& t = *inv;
  const RationalMatrix tt = t.transpose();
  const std::size_t n = h.dimension();
  const RationalVector d0 = map.offset_at(Rational(0));
  const RationalVector td = t * d0;

  QuadraticHamiltonian out(map.target);
  out.quadratic = tt * h.quadratic * t;
  const RationalVector ad = out.quadratic * d0;
  for (std::size_t j = 0; j < n; ++j) {
    Polynomial bj(Rational(-ad[j]));
    for (std::size_t i = 0; i < n; ++i)
      if (t(i, j) != 0) bj += h.linear[i] * t(i, j);
    out.linear[j] = std::move(bj);
  }
  out.scalar = h.scalar + Polynomial(Rational(dot(d0, ad) / 2));
  for (std::size_t i = 0; i < n; ++i) out.scalar -= h.linear[i] * td[i];
  for (const auto& v : h.potentials) {
    Potential w = v;
    w.direction = tt * v.direction;
    w.offset = v.offset - Polynomial(dot(v.direction, td));
    out.add_potential(std::move(w));
  }
  return out;
}

/// H' = H(r' + delta) + i hbar G d_t G^dagger for a displacement generator
/// acting on one particle. delta = (X, K) on that particle's pair, which gives
/// the extra terms Kdot x' - Xdot p' - Xdot K + hbar phidot.
inline QuadraticHamiltonian passive_hamiltonian_timedep(const QuadraticHamiltonian& h, const WeylElement& gen,
                                                        const Units& units, std::size_t particle = 0) {
  h.validate();
  const std::size_t n = h.dimension();
  if (2 * particle + 1 >= n) throw DimensionError("generator particle index out of range");
  const std::size_t ix = 2 * particle;
  const std::size_t ip = ix + 1;
  std::vector<Polynomial> delta(n);
  delta[ix] = gen.shift;
  delta[ip] = gen.kick;

  QuadraticHamiltonian out(primed(h.coordinates));
  out.quadratic = h.quadratic;
  for (std::size_t i = 0; i < n; ++i) {
    Polynomial bi = h.linear[i];
    bi += delta[ix] * h.quadratic(i, ix);
    bi += delta[ip] * h.quadratic(i, ip);
    out.linear[i] = std::move(bi);
  }
  Polynomial c = h.scalar;
  for (std::size_t i : {ix, ip}) {
    c += h.linear[i] * delta[i];
    for (std::size_t j : {ix, ip}) c += delta[i] * delta[j] * Rational(h.quadratic(i, j) / 2);
  }
  out.linear[ix] += gen.kick.derivative();
  out.linear[ip] -= gen.shift.derivative();
  c -= gen.shift.derivative() * gen.kick;
  c += gen.phase.derivative() * units.hbar;
  out.scalar = std::move(c);
  for (const auto& v : h.potentials) {
    Potential w = v;
    w.offset = v.offset + delta[ix] * v.direction[ix];
    out.add_potential(std::move(w));
  }
  return out;
}

/// Same, for a generator given as a frame map; only pure displacements
/// (S = I) are supported and they carry no scalar phase.
inline QuadraticHamiltonian passive_hamiltonian_timedep(const QuadraticHamiltonian& h, const AffineFrameMap& map,
                                                        const Units& units, std::size_t particle = 0) {
  if (map.linear != RationalMatrix::identity(map.dimension()) || map.dimension() != 2) {
    throw UnsupportedGeneratorError("only single-particle displacement generators are supported, got '" + map.name + "'");
  }
  WeylElement gen;
  gen.shift = -map.offset[0];
  gen.kick = -map.offset[1];
  return passive_hamiltonian_timedep(h, gen, units, particle);
}

/// (p' - alpha m Xdot)^2 / 2m + (1 - alpha) m Xddot x'.
inline QuadraticHamiltonian alpha_hamiltonian(const Rational& mass, const FrameTrajectory& traj, const Rational& alpha) {
  QuadraticHamiltonian h(CoordinateSystem({{"P'", "x'", "p'"}}));
  h.add_kinetic(1, mass);
  h.linear[0] = traj.acceleration() * Rational((1 - alpha) * mass);
  h.linear[1] = traj.velocity() * Rational(-alpha);
  h.scalar = traj.velocity() * traj.velocity() * Rational(alpha * alpha * mass / 2);
  return h;
}

/// u . r + constant(t), the shape every Heisenberg derivative takes for
/// quadratic Hamiltonians with linear potentials.
struct LinearForm {
  RationalVector coefficients;
  Polynomial constant;

  static LinearForm axis(std::size_t dim, std::size_t i) {
    LinearForm f;
    f.coefficients.assign(dim, Rational(0));
    f.coefficients.at(i) = 1;
    return f;
  }

  bool is_constant() const {
    for (const auto& c : coefficients)
      if (c != 0) return false;
    return true;
  }

  double evaluate(const Eigen::VectorXd& r, double t) const {
    double s = constant.evaluate(t);
    for (std::size_t i = 0; i < coefficients.size(); ++i) s += coefficients[i].get_d() * r(static_cast<Eigen::Index>(i));
    return s;
  }

  friend bool operator==(const LinearForm& a, const LinearForm& b) {
    return a.coefficients == b.coefficients && a.constant == b.constant;
  }

  friend LinearForm operator-(const LinearForm& a, const LinearForm& b) {
    LinearForm f = a;
    for (std::size_t i = 0; i < f.coefficients.size(); ++i) f.coefficients[i] -= b.coefficients[i];
    f.constant -= b.constant;
    return f;
  }

  friend LinearForm operator*(const Rational& s, LinearForm f) {
    for (auto& c : f.coefficients) c *= s;
    f.constant *= s;
    return f;
  }
};

/// d f / dt along dr/dt = J (A r + b(t)).
inline LinearForm time_derivative(const QuadraticHamiltonian& h, const LinearForm& f) {
  const QuadraticHamiltonian hf = h.folded();
  const RationalMatrix j = symplectic_form(h.dimension() / 2);
  const RationalVector uj = j.transpose() * f.coefficients;  // u^T J as a column
  for (const auto& v : hf.potentials) {
    if (dot(uj, v.direction) != 0) {
      throw NonQuadraticError("non-linear potential '" + v.name + "' enters the equation of motion");
    }
  }
  LinearForm out;
  out.coefficients = hf.quadratic.transpose() * uj;
  out.constant = f.constant.derivative();
  for (std::size_t i = 0; i < uj.size(); ++i)
    if (uj[i] != 0) out.constant += hf.linear[i] * uj[i];
  return out;
}

inline LinearForm heisenberg_velocity(const QuadraticHamiltonian& h, std::size_t axis) {
  return time_derivative(h, LinearForm::axis(h.dimension(), axis));
}

inline LinearForm heisenberg_acceleration(const QuadraticHamiltonian& h, std::size_t axis) {
  return time_derivative(h, time_derivative(h, LinearForm::axis(h.dimension(), axis)));
}

/// Expresses a form over the map's target coordinates in source coordinates.
inline LinearForm pull_back(const LinearForm& f, const AffineFrameMap& map) {
  LinearForm out;
  out.coefficients = map.linear.transpose() * f.coefficients;
  out.constant = f.constant;
  for (std::size_t i = 0; i < f.coefficients.size(); ++i) out.constant += map.offset[i] * f.coefficients[i];
  return out;
}

/// Expresses a form over source coordinates in target coordinates.
inline LinearForm push_forward(const LinearForm& f, const AffineFrameMap& map) {
  auto inv = map.linear.inverse();
  if (!inv) throw SingularMapError("map '" + map.name + "' is not invertible");
  return pull_back(f, inverse_map(map));
}

/// Drops particle pair k from a Hamiltonian that does not couple to it.
inline QuadraticHamiltonian remove_pair(const QuadraticHamiltonian& h, std::size_t k) {
  const std::size_t n = h.dimension();
  auto coupled = [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j / 2 == k) continue;
      if (h.quadratic(i, j) != 0) return true;
    }
    return false;
  };
  if (coupled(2 * k) || coupled(2 * k + 1)) throw DimensionError("pair is coupled to the rest of the Hamiltonian");
  std::vector<CoordinateSystem::Pair> pairs;
  for (std::size_t q = 0; q < h.coordinates.particles(); ++q)
    if (q != k) pairs.push_back(h.coordinates.pairs()[q]);
  QuadraticHamiltonian out{CoordinateSystem(std::move(pairs))};
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i)
    if (i / 2 != k) keep.push_back(i);
  for (std::size_t a = 0; a < keep.size(); ++a) {
    out.linear[a] = h.linear[keep[a]];
    for (std::size_t b = 0; b < keep.size(); ++b) out.quadratic(a, b) = h.quadratic(keep[a], keep[b]);
  }
  out.scalar = h.scalar;
  for (const auto& v : h.potentials) {
    if (v.direction[2 * k] != 0) throw DimensionError("potential '" + v.name + "' depends on the dropped pair");
    Potential w = v;
    w.direction.clear();
    for (std::size_t i : keep) w.direction.push_back(v.direction[i]);
    out.add_potential(std::move(w));
  }
  return out;
}

inline AffineFrameMap remove_pair(const AffineFrameMap& map, std::size_t k) {
  const std::size_t n = map.dimension();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if ((i / 2 == k) != (j / 2 == k) && map.linear(i, j) != 0) throw DimensionError("pair is mixed by the map");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i)
    if (i / 2 != k) keep.push_back(i);
  RationalMatrix s(keep.size(), keep.size());
  std::vector<Polynomial> d;
  for (std::size_t a = 0; a < keep.size(); ++a) {
    d.push_back(map.offset[keep[a]]);
    for (std::size_t b = 0; b < keep.size(); ++b) s(a, b) = map.linear(keep[a], keep[b]);
  }
  auto drop = [k](const CoordinateSystem& cs) {
    std::vector<CoordinateSystem::Pair> pairs;
    for (std::size_t q = 0; q < cs.particles(); ++q)
      if (q != k) pairs.push_back(cs.pairs()[q]);
    return CoordinateSystem(std::move(pairs));
  };
  return detail::make_map(map.name, std::move(s), std::move(d), drop(map.source), drop(map.target));
}

}  // namespace qframes
