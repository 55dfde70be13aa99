#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rational.hpp"

namespace qframes {

/// Univariate polynomial in t with exact rational coefficients, c[0] + c[1] t + ...
/// The zero polynomial has no coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(const Rational& constant) : coeffs_{constant} { trim(); }  // NOLINT: implicit by intent
  Polynomial(long constant) : Polynomial(Rational(constant)) {}         // NOLINT
  Polynomial(std::initializer_list<Rational> coeffs) : coeffs_(coeffs) { trim(); }
  explicit Polynomial(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  static Polynomial monomial(const Rational& c, std::size_t power) {
    std::vector<Rational> v(power + 1, Rational(0));
    v[power] = c;
    return Polynomial(std::move(v));
  }

  const std::vector<Rational>& coefficients() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }
  bool is_constant() const { return coeffs_.size() <= 1; }
  /// Degree; -1 for the zero polynomial.
  long degree() const { return static_cast<long>(coeffs_.size()) - 1; }

  Rational coefficient(std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : Rational(0); }

  Rational operator()(const Rational& t) const {
    Rational acc(0);
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + *it;
    return acc;
  }

  double evaluate(double t) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + it->get_d();
    return acc;
  }

  Polynomial derivative() const {
    if (coeffs_.size() <= 1) return {};
    std::vector<Rational> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = coeffs_[k] * static_cast<long>(k);
    return Polynomial(std::move(d));
  }

  /// Antiderivative vanishing at t = 0.
  Polynomial integral() const {
    if (coeffs_.empty()) return {};
    std::vector<Rational> v(coeffs_.size() + 1, Rational(0));
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      v[k + 1] = coeffs_[k] / Rational(static_cast<long>(k + 1));
    }
    return Polynomial(std::move(v));
  }

  Polynomial& operator+=(const Polynomial& o) {
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Rational(0));
    for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
    trim();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Rational(0));
    for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
    trim();
    return *this;
  }
  Polynomial& operator*=(const Rational& s) {
    for (auto& c : coeffs_) c *= s;
    trim();
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) { return a *= Rational(-1); }
  friend Polynomial operator*(Polynomial a, const Rational& s) { return a *= s; }
  friend Polynomial operator*(const Rational& s, Polynomial a) { return a *= s; }
  friend Polynomial operator/(Polynomial a, const Rational& s) { return a *= Rational(1 / s); }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> v(a.coeffs_.size() + b.coeffs_.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) v[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(v));
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }
  friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

  /// Human-readable form, e.g. "1/2 t^2 - 3".
  std::string to_string(const std::string& var = "t") const {
    if (coeffs_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (std::size_t k = coeffs_.size(); k-- > 0;) {
      const Rational& c = coeffs_[k];
      if (c == 0) continue;
      const bool neg = c < 0;
      const Rational mag = neg ? Rational(-c) : c;
      if (first) {
        if (neg) os << "-";
      } else {
        os << (neg ? " - " : " + ");
      }
      first = false;
      if (k == 0 || mag != 1) os << mag.get_str();
      if (k > 0) {
        if (mag != 1) os << " ";
        os << var;
        if (k > 1) os << "^" << k;
      }
    }
    return os.str();
  }

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
  }

  std::vector<Rational> coeffs_;
};

}  // namespace qframes
