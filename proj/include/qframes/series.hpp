#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "errors.hpp"

namespace qframes {

struct FiniteDifference {
  double value;
  double error_estimate;
};

/// Second derivative at the centre sample of a uniformly spaced series:
/// central differences with steps h and 2h, combined by Richardson
/// extrapolation (4 a_h - a_2h) / 3.
inline FiniteDifference fd_acceleration(std::span<const double> values, double dt) {
  if (values.size() < 5) {
    throw InsufficientSamplesError("need at least 5 samples, got " + std::to_string(values.size()));
  }
  const std::size_t c = values.size() / 2;
  const double h = dt;
  const double a1 = (values[c + 1] - 2.0 * values[c] + values[c - 1]) / (h * h);
  const double a2 = (values[c + 2] - 2.0 * values[c] + values[c - 2]) / (4.0 * h * h);
  return {(4.0 * a1 - a2) / 3.0, std::abs(a1 - a2) / 3.0};
}

/// First derivative at the centre sample, Richardson-refined.
inline FiniteDifference fd_velocity(std::span<const double> values, double dt) {
  if (values.size() < 5) {
    throw InsufficientSamplesError("need at least 5 samples, got " + std::to_string(values.size()));
  }
  const std::size_t c = values.size() / 2;
  const double v1 = (values[c + 1] - values[c - 1]) / (2.0 * dt);
  const double v2 = (values[c + 2] - values[c - 2]) / (4.0 * dt);
  return {(4.0 * v1 - v2) / 3.0, std::abs(v1 - v2) / 3.0};
}

}  // namespace qframes
