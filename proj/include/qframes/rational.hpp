#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

#include "errors.hpp"

namespace qframes {

/// Arbitrary-precision exact rational.
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

/// Parses "p/q", "p" or "-p/q". Whitespace is not accepted.
inline Rational parse_rational(std::string_view text) {
  if (text.empty()) throw ConfigError("empty rational literal");
  std::size_t slash = std::string_view::npos;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '/') {
      if (slash != std::string_view::npos) throw ConfigError("malformed rational '" + std::string(text) + "'");
      slash = i;
    } else if (c == '-' || c == '+') {
      if (i != 0) throw ConfigError("malformed rational '" + std::string(text) + "'");
    } else if (c < '0' || c > '9') {
      throw ConfigError("malformed rational '" + std::string(text) + "'");
    }
  }
  const std::string s(text[0] == '+' ? text.substr(1) : text);
  if (s.empty() || s == "-" || s.back() == '/' || s.front() == '/' ||
      (slash != std::string_view::npos && s[s.find('/') - 1] == '-'))
    throw ConfigError("malformed rational '" + std::string(text) + "'");
  Rational q;
  if (q.set_str(s, 10) != 0) throw ConfigError("malformed rational '" + std::string(text) + "'");
  if (q.get_den() == 0) throw ConfigError("zero denominator in '" + std::string(text) + "'");
  q.canonicalize();
  return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline double to_double(const Rational& q) { return q.get_d(); }

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

}  // namespace qframes
