#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

#include "errors.hpp"

namespace qframes {

/// a |Mc^2>|0> + b e^{i theta} |mc^2>|hbar omega> on atom (x) field, or the
/// atom-only superposition (a |Mc^2> + b e^{i theta} |mc^2>) |0> when
/// `entangled` is false. Energy labels are bookkeeping only.
struct DecayState {
  double a = 1.0;
  double b = 0.0;
  double theta = 0.0;
  bool entangled = true;

  void validate() const {
    if (std::abs(a * a + b * b - 1.0) > 1e-12) throw ConfigError("decay amplitudes must satisfy a^2 + b^2 = 1");
  }
};

/// Amplitude kept in polar form so that |z|^2 never sees a rounded phase.
struct PolarAmplitude {
  double magnitude = 0.0;
  double phase = 0.0;
};

using DensityMatrix2 = std::array<std::array<std::complex<double>, 2>, 2>;

/// psi[atom][field] of the 2 (x) 2 state.
inline std::array<std::array<PolarAmplitude, 2>, 2> amplitudes(const DecayState& s) {
  std::array<std::array<PolarAmplitude, 2>, 2> psi{};
  psi[0][0] = {s.a, 0.0};
  if (s.entangled) {
    psi[1][1] = {s.b, s.theta};
  } else {
    psi[1][0] = {s.b, s.theta};
  }
  return psi;
}

/// Partial trace over the field: rho_ij = sum_k psi_ik conj(psi_jk).
inline DensityMatrix2 reduced_atom_state(const DecayState& s) {
  s.validate();
  const auto psi = amplitudes(s);
  DensityMatrix2 rho{};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      std::complex<double> acc = 0.0;
      for (std::size_t k = 0; k < 2; ++k) {
        const double mag = psi[i][k].magnitude * psi[j][k].magnitude;
        if (mag == 0.0) continue;
        acc += i == j ? std::complex<double>(mag, 0.0) : std::polar(mag, psi[i][k].phase - psi[j][k].phase);
      }
      rho[i][j] = acc;
    }
  }
  return rho;
}

inline double purity(const DensityMatrix2& rho) {
  return rho[0][0].real() * rho[0][0].real() + rho[1][1].real() * rho[1][1].real() + 2.0 * std::norm(rho[0][1]);
}

/// Interferometric contrast 2 |rho_01|.
inline double visibility(const DensityMatrix2& rho) { return 2.0 * std::abs(rho[0][1]); }

}  // namespace qframes
