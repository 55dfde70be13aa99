#pragma once

#include <cstddef>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"

namespace qframes {

/// One-dimensional potential V evaluated at the position combination
/// l^T r + offset(t).
struct Potential {
  enum class Kind { linear, generic };

  std::string name;
  Kind kind = Kind::linear;
  RationalVector direction;  // momentum components must be zero
  Polynomial offset;
  Rational slope;                        // linear: V(y) = slope * y
  std::function<double(double)> value;  // generic

  static Potential linear(std::string name, RationalVector direction, Rational slope) {
    Potential v;
    v.name = std::move(name);
    v.kind = Kind::linear;
    v.direction = std::move(direction);
    v.slope = std::move(slope);
    return v;
  }

  static Potential generic(std::string name, RationalVector direction, std::function<double(double)> fn) {
    Potential v;
    v.name = std::move(name);
    v.kind = Kind::generic;
    v.direction = std::move(direction);
    v.value = std::move(fn);
    return v;
  }

  double operator()(double y) const { return kind == Kind::linear ? slope.get_d() * y : value(y); }

  bool position_only() const {
    for (std::size_t i = 1; i < direction.size(); i += 2)
      if (direction[i] != 0) return false;
    return true;
  }
};

/// H = 1/2 r^T A r + b(t)^T r + c(t) + sum_k V_k(l_k^T r + o_k(t)).
/// Products x_i p_j in the quadratic form are Weyl-symmetrised.
struct QuadraticHamiltonian {
  CoordinateSystem coordinates;
  RationalMatrix quadratic;
  std::vector<Polynomial> linear;
  Polynomial scalar;
  std::vector<Potential> potentials;

  QuadraticHamiltonian() = default;
  explicit QuadraticHamiltonian(CoordinateSystem cs)
      : coordinates(std::move(cs)),
        quadratic(coordinates.dimension(), coordinates.dimension()),
        linear(coordinates.dimension()) {}

  std::size_t dimension() const { return coordinates.dimension(); }

  /// Adds coefficient * r_i r_j to H (symmetrised when i != j).
  QuadraticHamiltonian& add_quadratic(std::size_t i, std::size_t j, const Rational& coefficient) {
    if (i == j) {
      quadratic(i, i) += 2 * coefficient;
    } else {
      quadratic(i, j) += coefficient;
      quadratic(j, i) += coefficient;
    }
    return *this;
  }

  /// Adds p_i^2 / (2 m).
  QuadraticHamiltonian& add_kinetic(std::size_t momentum_axis, const Rational& mass) {
    return add_quadratic(momentum_axis, momentum_axis, Rational(1 / (2 * mass)));
  }

  QuadraticHamiltonian& add_linear(std::size_t i, const Polynomial& coefficient) {
    linear.at(i) += coefficient;
    return *this;
  }

  QuadraticHamiltonian& add_potential(Potential v) {
    if (v.direction.size() != dimension()) throw DimensionError("potential direction has wrong length");
    if (!v.position_only()) throw DimensionError("potential '" + v.name + "' depends on a momentum axis");
    potentials.push_back(std::move(v));
    return *this;
  }

  bool has_generic_potential() const {
    for (const auto& v : potentials)
      if (v.kind == Potential::Kind::generic) return true;
    return false;
  }

  /// Linear potentials moved into b and c; generic ones are kept.
  QuadraticHamiltonian folded() const {
    QuadraticHamiltonian h = *this;
    h.potentials.clear();
    for (const auto& v : potentials) {
      if (v.kind == Potential::Kind::generic) {
        h.potentials.push_back(v);
        continue;
      }
      for (std::size_t i = 0; i < v.direction.size(); ++i) h.linear[i] += Polynomial(Rational(v.slope * v.direction[i]));
      h.scalar += v.offset * v.slope;
    }
    return h;
  }

  void validate() const {
    if (quadratic.rows() != dimension() || quadratic.cols() != dimension() || linear.size() != dimension())
      throw DimensionError("Hamiltonian coefficient sizes do not match its coordinate system");
    if (!quadratic.is_symmetric()) throw DimensionError("quadratic form must be symmetric");
    for (const auto& v : potentials)
      if (!v.position_only()) throw DimensionError("potential '" + v.name + "' depends on a momentum axis");
  }

  /// Coefficient of r_i r_j as it would be written in H (i <= j).
  Rational monomial(std::size_t i, std::size_t j) const {
    return i == j ? Rational(quadratic(i, i) / 2) : quadratic(i, j);
  }
};

namespace detail {

inline void append_term(std::ostringstream& os, bool& first, const std::string& coeff_text, bool negative,
                        const std::string& symbol) {
  if (first) {
    if (negative) os << "-";
  } else {
    os << (negative ? " - " : " + ");
  }
  first = false;
  if (symbol.empty()) {
    os << coeff_text;
  } else if (coeff_text == "1") {
    os << symbol;
  } else {
    os << coeff_text << " " << symbol;
  }
}

inline std::string combination(const RationalVector& l, const CoordinateSystem& cs, const Polynomial& offset) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l[i] == 0) continue;
    const bool neg = l[i] < 0;
    append_term(os, first, (neg ? Rational(-l[i]) : l[i]).get_str(), neg, cs.axis_name(i));
  }
  if (!offset.is_zero()) {
    os << (first ? "" : " + ") << "(" << offset.to_string() << ")";
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

}  // namespace detail

/// Human-readable polynomial form, e.g. "1/2 p'^2 + 2 x'".
inline std::string to_string(const QuadraticHamiltonian& h) {
  std::ostringstream os;
  bool first = true;
  const auto& cs = h.coordinates;
  for (std::size_t i = 0; i < h.dimension(); ++i) {
    for (std::size_t j = i; j < h.dimension(); ++j) {
      const Rational c = h.monomial(i, j);
      if (c == 0) continue;
      const std::string sym = i == j ? cs.axis_name(i) + "^2" : cs.axis_name(i) + " " + cs.axis_name(j);
      const bool neg = c < 0;
      detail::append_term(os, first, (neg ? Rational(-c) : c).get_str(), neg, sym);
    }
  }
  for (std::size_t i = 0; i < h.dimension(); ++i) {
    const Polynomial& b = h.linear[i];
    if (b.is_zero()) continue;
    if (b.is_constant()) {
      const Rational c = b.coefficient(0);
      const bool neg = c < 0;
      detail::append_term(os, first, (neg ? Rational(-c) : c).get_str(), neg, cs.axis_name(i));
    } else {
      detail::append_term(os, first, "(" + b.to_string() + ")", false, cs.axis_name(i));
    }
  }
  for (const auto& v : h.potentials) {
    const std::string arg = detail::combination(v.direction, cs, v.offset);
    if (v.kind == Potential::Kind::linear) {
      const bool neg = v.slope < 0;
      detail::append_term(os, first, (neg ? Rational(-v.slope) : v.slope).get_str(), neg, "(" + arg + ")");
    } else {
      detail::append_term(os, first, "1", false, v.name + "(" + arg + ")");
    }
  }
  if (!h.scalar.is_zero()) {
    if (h.scalar.is_constant()) {
      const Rational c = h.scalar.coefficient(0);
      detail::append_term(os, first, (c < 0 ? Rational(-c) : c).get_str(), c < 0, "");
    } else {
      detail::append_term(os, first, "(" + h.scalar.to_string() + ")", false, "");
    }
  }
  if (first) os << "0";
  return os.str();
}

}  // namespace qframes
