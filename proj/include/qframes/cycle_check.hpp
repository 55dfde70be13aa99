#pragma once

#include <vector>

#include "grid.hpp"
#include "weyl.hpp"

namespace qframes {

struct CycleInvariance {
  double before;
  double after;
  WeylElement composed;  // must be a pure global phase
  GridState transformed;
};

/// Applies the product elements[0] * ... * elements[n-1] actively, factor by
/// factor (U^dagger psi applies elements[0]^dagger first), and compares <obs>.
inline CycleInvariance cyclic_expectation_invariance(const std::vector<WeylElement>& elements, const GridState& state,
                                                     const Observable& obs, const Rational& t, std::size_t axis = 0) {
  WeylElement composed = product(elements, state.units);
  require_cyclic(composed);
  GridState out = state;
  for (const auto& e : elements) out = apply_weyl(std::move(out), e, t, axis);
  const double before = expectation(state, obs);
  const double after = elements.empty() ? before : expectation(out, obs);
  return {before, after, std::move(composed), std::move(out)};
}

}  // namespace qframes
