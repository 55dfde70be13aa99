#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fft.hpp"
#include "gaussian.hpp"
#include "hamiltonian.hpp"
#include "weyl.hpp"

namespace qframes {

using Complex = std::complex<double>;

/// Uniform periodic axis: points x_j = min + j * spacing, j < points.
struct GridAxis {
  double min = -1.0;
  double max = 1.0;
  std::size_t points = 2;

  double extent() const { return max - min; }
  double spacing() const { return extent() / static_cast<double>(points); }
  double coordinate(std::size_t j) const { return min + static_cast<double>(j) * spacing(); }
  double wavenumber(std::size_t j) const {
    const auto n = static_cast<std::ptrdiff_t>(points);
    const auto jj = static_cast<std::ptrdiff_t>(j);
    return 2.0 * std::numbers::pi / extent() * static_cast<double>(jj < n / 2 ? jj : jj - n);
  }
};

struct GridSpec {
  std::vector<GridAxis> axes;

  std::size_t rank() const { return axes.size(); }
  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.points;
    return n;
  }
  double cell_volume() const {
    double v = 1.0;
    for (const auto& a : axes) v *= a.spacing();
    return v;
  }
  std::vector<std::size_t> shape() const {
    std::vector<std::size_t> s;
    for (const auto& a : axes) s.push_back(a.points);
    return s;
  }
  /// Row-major stride of an axis.
  std::size_t stride(std::size_t axis) const {
    std::size_t s = 1;
    for (std::size_t k = axis + 1; k < axes.size(); ++k) s *= axes[k].points;
    return s;
  }
  std::size_t index_along(std::size_t flat, std::size_t axis) const { return (flat / stride(axis)) % axes[axis].points; }

  void validate() const {
    if (axes.empty() || axes.size() > 2) throw GridMismatchError("grids must have one or two axes");
    for (const auto& a : axes) {
      if (a.points < 2 || !std::has_single_bit(a.points)) throw GridMismatchError("axis size must be a power of two");
      if (!(a.max > a.min)) throw GridMismatchError("axis extent must be positive");
    }
  }

  static GridSpec line(double min, double max, std::size_t points) { return GridSpec{{GridAxis{min, max, points}}}; }
  static GridSpec square(double min, double max, std::size_t points) {
    return GridSpec{{GridAxis{min, max, points}, GridAxis{min, max, points}}};
  }
};

/// Wavefunction sampled on a 1D or 2D periodic grid. Axis k carries
/// particle k of the Hamiltonian's coordinate system.
struct GridState {
  GridSpec spec;
  std::vector<Complex> amplitudes;
  double time = 0.0;
  Units units;

  double norm() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s * spec.cell_volume();
  }
};

inline Complex overlap(const GridState& a, const GridState& b) {
  if (a.amplitudes.size() != b.amplitudes.size()) throw GridMismatchError("states live on different grids");
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) s += std::conj(a.amplitudes[i]) * b.amplitudes[i];
  return s * a.spec.cell_volume();
}

inline double fidelity(const GridState& a, const GridState& b) { return std::abs(overlap(a, b)); }

/// Product of Gaussian packets, one per axis, normalised on the grid.
inline GridState make_gaussian(const GridSpec& spec, const std::vector<PacketParameters>& packets, const Units& units) {
  spec.validate();
  if (packets.size() != spec.rank()) throw DimensionError("one packet per grid axis required");
  for (std::size_t k = 0; k < packets.size(); ++k) {
    const auto& p = packets[k];
    const auto& a = spec.axes[k];
    if (p.width <= 0.0 || p.position - 8.0 * p.width < a.min || p.position + 8.0 * p.width > a.max) {
      throw PacketTooWideError("packet at " + std::to_string(p.position) + " with width " + std::to_string(p.width) +
                               " does not keep an 8 sigma margin on axis " + std::to_string(k));
    }
  }
  const double hbar = units.hbar_value();
  std::vector<std::vector<Complex>> factors;
  for (std::size_t k = 0; k < packets.size(); ++k) {
    const auto& p = packets[k];
    const auto& a = spec.axes[k];
    std::vector<Complex> f(a.points);
    for (std::size_t j = 0; j < a.points; ++j) {
      const double x = a.coordinate(j);
      const double u = (x - p.position) / p.width;
      f[j] = std::exp(-0.25 * u * u) * std::polar(1.0, p.momentum * x / hbar);
    }
    factors.push_back(std::move(f));
  }
  GridState s{spec, std::vector<Complex>(spec.size()), 0.0, units};
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
    Complex v = 1.0;
    for (std::size_t k = 0; k < factors.size(); ++k) v *= factors[k][spec.index_along(i, k)];
    s.amplitudes[i] = v;
  }
  const double scale = 1.0 / std::sqrt(s.norm());
  for (auto& a : s.amplitudes) a *= scale;
  return s;
}

inline GridState make_gaussian(const GridSpec& spec, double position, double momentum, double width,
                               const Units& units) {
  return make_gaussian(spec, std::vector<PacketParameters>{{position, momentum, width}}, units);
}

struct Observable {
  enum class Kind { position, momentum, position_squared, momentum_squared, custom_diagonal };
  Kind kind = Kind::position;
  std::size_t axis = 0;
  std::function<double(double)> diagonal;  // custom_diagonal only

  static Observable position(std::size_t axis = 0) { return {Kind::position, axis, {}}; }
  static Observable momentum(std::size_t axis = 0) { return {Kind::momentum, axis, {}}; }
  static Observable position_squared(std::size_t axis = 0) { return {Kind::position_squared, axis, {}}; }
  static Observable momentum_squared(std::size_t axis = 0) { return {Kind::momentum_squared, axis, {}}; }
  static Observable custom(std::function<double(double)> f, std::size_t axis = 0) {
    return {Kind::custom_diagonal, axis, std::move(f)};
  }
};

namespace detail {

inline std::vector<Complex> to_momentum(const GridState& s) {
  std::vector<Complex> buf = s.amplitudes;
  FftPlan(s.spec.shape()).forward(buf);
  return buf;
}

}  // namespace detail

inline double expectation(const GridState& s, const Observable& obs) {
  if (obs.axis >= s.spec.rank()) throw DimensionError("observable axis out of range");
  const auto& ax = s.spec.axes[obs.axis];
  const double hbar = s.units.hbar_value();
  switch (obs.kind) {
    case Observable::Kind::position:
    case Observable::Kind::position_squared:
    case Observable::Kind::custom_diagonal: {
      double acc = 0.0;
      for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
        const double x = ax.coordinate(s.spec.index_along(i, obs.axis));
        const double f = obs.kind == Observable::Kind::position ? x
                         : obs.kind == Observable::Kind::position_squared ? x * x
                                                                          : obs.diagonal(x);
        acc += f * std::norm(s.amplitudes[i]);
      }
      return acc * s.spec.cell_volume();
    }
    case Observable::Kind::momentum:
    case Observable::Kind::momentum_squared: {
      const auto phi = detail::to_momentum(s);
      double acc = 0.0, total = 0.0;
      for (std::size_t i = 0; i < phi.size(); ++i) {
        const double p = hbar * ax.wavenumber(s.spec.index_along(i, obs.axis));
        const double w = std::norm(phi[i]);
        acc += (obs.kind == Observable::Kind::momentum ? p : p * p) * w;
        total += w;
      }
      return acc / total;
    }
  }
  return 0.0;
}

/// First moments and symmetrised covariance in the (x_1, p_1, ...) order.
struct GridMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

inline GridMoments grid_moments(const GridState& s) {
  const std::size_t rank = s.spec.rank();
  const auto dim = static_cast<Eigen::Index>(2 * rank);
  const double hbar = s.units.hbar_value();
  const double dv = s.spec.cell_volume();
  const std::size_t n = s.amplitudes.size();
  const FftPlan fft(s.spec.shape());

  std::vector<Complex> phi = s.amplitudes;
  fft.forward(phi);
  double phi_total = 0.0;
  for (const auto& v : phi) phi_total += std::norm(v);

  auto x_of = [&](std::size_t i, std::size_t a) { return s.spec.axes[a].coordinate(s.spec.index_along(i, a)); };
  auto p_of = [&](std::size_t i, std::size_t a) { return hbar * s.spec.axes[a].wavenumber(s.spec.index_along(i, a)); };

  // raw second moments <r_i r_j> (symmetrised)
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::norm(s.amplitudes[i]) * dv;
    const double wp = std::norm(phi[i]) / phi_total;
    for (std::size_t a = 0; a < rank; ++a) {
      const auto ia = static_cast<Eigen::Index>(2 * a);
      mean(ia) += w * x_of(i, a);
      mean(ia + 1) += wp * p_of(i, a);
      for (std::size_t b = 0; b < rank; ++b) {
        const auto ib = static_cast<Eigen::Index>(2 * b);
        second(ia, ib) += w * x_of(i, a) * x_of(i, b);
        second(ia + 1, ib + 1) += wp * p_of(i, a) * p_of(i, b);
      }
    }
  }
  // Re <psi| x_a p_b |psi>
  for (std::size_t b = 0; b < rank; ++b) {
    std::vector<Complex> pb = phi;
    for (std::size_t i = 0; i < n; ++i) pb[i] *= p_of(i, b) / static_cast<double>(n);
    fft.backward(pb);
    for (std::size_t a = 0; a < rank; ++a) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += x_of(i, a) * std::real(std::conj(s.amplitudes[i]) * pb[i]);
      const auto ia = static_cast<Eigen::Index>(2 * a);
      const auto ib = static_cast<Eigen::Index>(2 * b + 1);
      second(ia, ib) = acc * dv;
      second(ib, ia) = acc * dv;
    }
  }
  return {mean, second - mean * mean.transpose()};
}

struct PropagationOptions {
  std::size_t sample_every = 0;  // steps between observer calls; 0 = start and end only
  std::function<void(const GridState&)> observer;
  double edge_fraction = 1.0 / 32.0;  // width of the monitored boundary band per axis
  double edge_tolerance = 1e-8;       // allowed probability inside the band
};

/// Probability inside the outer band of every axis.
inline double edge_probability(const GridState& s, double edge_fraction) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
    bool edge = false;
    for (std::size_t a = 0; a < s.spec.rank(); ++a) {
      const auto j = s.spec.index_along(i, a);
      const auto band = static_cast<std::size_t>(std::ceil(edge_fraction * static_cast<double>(s.spec.axes[a].points)));
      edge = edge || j < band || j + band >= s.spec.axes[a].points;
    }
    if (edge) acc += std::norm(s.amplitudes[i]);
  }
  return acc * s.spec.cell_volume();
}

namespace detail {

inline void check_boundary(const GridState& s, const PropagationOptions& opts) {
  const double p = edge_probability(s, opts.edge_fraction);
  if (p > opts.edge_tolerance) {
    throw BoundaryBreachError("probability " + std::to_string(p) + " reached the grid boundary at t = " +
                              std::to_string(s.time));
  }
}

}  // namespace detail

/// Strang split-step propagation. The momentum-diagonal part (quadratic and
/// linear momentum terms) and the position-diagonal part (quadratic and
/// linear position terms, potentials, scalar) have their time dependence
/// sampled at the midpoint of each step. Consecutive kinetic half steps are
/// fused, so each step costs one forward and one inverse transform.
inline GridState propagate(GridState state, const QuadraticHamiltonian& h, double t_final, double dt,
                           const PropagationOptions& opts = {}) {
  h.validate();
  const std::size_t rank = state.spec.rank();
  if (h.coordinates.particles() != rank) throw DimensionError("Hamiltonian and grid dimensions differ");
  if (!(dt > 0.0)) throw DimensionError("time step must be positive");
  for (std::size_t a = 0; a < rank; ++a)
    for (std::size_t b = 0; b < rank; ++b)
      if (h.quadratic(2 * a, 2 * b + 1) != 0) {
        throw NonSeparableError("Hamiltonian couples " + h.coordinates.axis_name(2 * a) + " and " +
                                h.coordinates.axis_name(2 * b + 1));
      }

  const std::size_t n = state.amplitudes.size();
  const double hbar = state.units.hbar_value();
  const auto& spec = state.spec;
  const FftPlan fft(spec.shape());

  // Static grids and coefficient arrays.
  std::vector<double> kinetic_static(n, 0.0), potential_static(n, 0.0);
  std::vector<std::vector<double>> p_axis(rank, std::vector<double>(n)), x_axis(rank, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < rank; ++a) {
      const auto j = spec.index_along(i, a);
      p_axis[a][i] = hbar * spec.axes[a].wavenumber(j);
      x_axis[a][i] = spec.axes[a].coordinate(j);
    }
    for (std::size_t a = 0; a < rank; ++a)
      for (std::size_t b = 0; b < rank; ++b) {
        kinetic_static[i] += 0.5 * h.quadratic(2 * a + 1, 2 * b + 1).get_d() * p_axis[a][i] * p_axis[b][i];
        potential_static[i] += 0.5 * h.quadratic(2 * a, 2 * b).get_d() * x_axis[a][i] * x_axis[b][i];
      }
  }
  std::vector<const Potential*> moving_potentials;
  for (const auto& v : h.potentials) {
    if (!v.offset.is_constant()) {
      moving_potentials.push_back(&v);
      continue;
    }
    const double off = v.offset.evaluate(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double y = off;
      for (std::size_t a = 0; a < rank; ++a) y += v.direction[2 * a].get_d() * x_axis[a][i];
      potential_static[i] += v(y);
    }
  }

  // Kinetic energy at time t, applied for duration tau.
  // Also divides by n to normalise the inverse transform that follows.
  auto kinetic_phase = [&](std::vector<Complex>& phi, double t, double tau, std::optional<double> t_extra = {}) {
    std::vector<double> bp(rank), bp_extra(rank);
    for (std::size_t a = 0; a < rank; ++a) {
      bp[a] = h.linear[2 * a + 1].evaluate(t);
      if (t_extra) bp_extra[a] = h.linear[2 * a + 1].evaluate(*t_extra);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    const bool fused = t_extra.has_value();
    for (std::size_t i = 0; i < n; ++i) {
      double e = kinetic_static[i];
      for (std::size_t a = 0; a < rank; ++a) e += bp[a] * p_axis[a][i];
      if (fused) {
        e += kinetic_static[i];
        for (std::size_t a = 0; a < rank; ++a) e += bp_extra[a] * p_axis[a][i];
      }
      phi[i] *= std::polar(inv_n, -e * tau / hbar);
    }
  };
  auto potential_phase = [&](std::vector<Complex>& psi, double t, double tau) {
    std::vector<double> bx(rank);
    for (std::size_t a = 0; a < rank; ++a) bx[a] = h.linear[2 * a].evaluate(t);
    const double c = h.scalar.evaluate(t);
    for (std::size_t i = 0; i < n; ++i) {
      double e = potential_static[i] + c;
      for (std::size_t a = 0; a < rank; ++a) e += bx[a] * x_axis[a][i];
      for (const Potential* v : moving_potentials) {
        double y = v->offset.evaluate(t);
        for (std::size_t a = 0; a < rank; ++a) y += v->direction[2 * a].get_d() * x_axis[a][i];
        e += (*v)(y);
      }
      psi[i] *= std::polar(1.0, -e * tau / hbar);
    }
  };

  const double span = t_final - state.time;
  const auto steps = static_cast<std::size_t>(std::llround(span / dt));
  if (std::abs(static_cast<double>(steps) * dt - span) > 1e-9 * std::max(1.0, std::abs(span))) {
    throw DimensionError("t_final - t0 must be an integer number of steps");
  }
  const double t0 = state.time;
  auto& psi = state.amplitudes;

  if (opts.observer) opts.observer(state);
  // Pending kinetic half step (midpoint time) still to be applied.
  bool pending = false;
  double pending_time = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double tm = t0 + (static_cast<double>(k) + 0.5) * dt;
    fft.forward(psi);
    // Kinetic factors commute, so the previous closing half step and this
    // opening half step merge into one multiplication.
    kinetic_phase(psi, tm, 0.5 * dt, pending ? std::optional<double>(pending_time) : std::nullopt);
    fft.backward(psi);
    potential_phase(psi, tm, dt);
    pending = true;
    pending_time = tm;
    state.time = t0 + static_cast<double>(k + 1) * dt;

    const bool sample = opts.sample_every > 0 && (k + 1) % opts.sample_every == 0;
    if (sample || k + 1 == steps) {
      fft.forward(psi);
      kinetic_phase(psi, pending_time, 0.5 * dt);
      fft.backward(psi);
      pending = false;
      detail::check_boundary(state, opts);
      if (opts.observer && (sample || opts.sample_every == 0)) opts.observer(state);
    }
  }
  return state;
}

/// Active application (G^dagger psi)(x) = e^{-i phi} e^{-i K x / hbar} psi(x + X)
/// of a Weyl element at time t on one axis. Shifts that are whole grid
/// cells are exact permutations; others fall back to a spectral shift.
inline GridState apply_weyl(GridState s, const WeylElement& u, const Rational& t, std::size_t axis = 0) {
  if (axis >= s.spec.rank()) throw DimensionError("axis out of range");
  const Rational shift = u.shift(t);
  const Rational kick = u.kick(t);
  const Rational phase = u.phase(t);
  if (shift == 0 && kick == 0 && phase == 0) return s;

  const auto& ax = s.spec.axes[axis];
  const double hbar = s.units.hbar_value();
  const double cells = shift.get_d() / ax.spacing();
  const double whole = std::round(cells);
  const std::size_t stride = s.spec.stride(axis);
  const std::size_t n_axis = ax.points;
  if (shift != 0) {
    if (std::abs(cells - whole) < 1e-9) {
      const auto n = static_cast<long long>(n_axis);
      const long long offset = ((static_cast<long long>(whole) % n) + n) % n;
      std::vector<Complex> out(s.amplitudes.size());
      for (std::size_t i = 0; i < out.size(); ++i) {
        const std::size_t j = s.spec.index_along(i, axis);
        const std::size_t src = (j + static_cast<std::size_t>(offset)) % n_axis;
        out[i] = s.amplitudes[i + (src - j) * stride];  // unsigned wrap cancels
      }
      s.amplitudes = std::move(out);
    } else {
      const double before = s.norm();
      const FftPlan fft(s.spec.shape());
      fft.forward(s.amplitudes);
      const double inv_n = 1.0 / static_cast<double>(s.amplitudes.size());
      for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
        const double k = ax.wavenumber(s.spec.index_along(i, axis));
        s.amplitudes[i] *= std::polar(inv_n, k * shift.get_d());
      }
      fft.backward(s.amplitudes);
      std::clog << "qframes: interpolated shift of " << cells << " cells, norm drift " << s.norm() - before << "\n";
    }
  }
  const double k = kick.get_d();
  const double ph = phase.get_d();
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
    const double x = ax.coordinate(s.spec.index_along(i, axis));
    s.amplitudes[i] *= std::polar(1.0, -ph - k * x / hbar);
  }
  return s;
}

enum class ShiftDirection { forward, inverse };

/// e^{i X p / hbar} acting on psi(X, x): forward gives psi(X, x + X),
/// inverse psi(X, x - X). Axis 0 holds X, axis 1 holds x.
inline GridState apply_conditional_shift(GridState s, ShiftDirection direction) {
  if (s.spec.rank() != 2) throw GridMismatchError("conditional shift needs a two-axis grid");
  const auto& frame = s.spec.axes[0];
  const auto& particle = s.spec.axes[1];
  const double d = particle.spacing();
  if (std::abs(frame.spacing() - d) > 1e-12 * d) throw GridMismatchError("frame and particle spacings differ");
  const double start = frame.min / d;
  if (std::abs(start - std::round(start)) > 1e-9) {
    throw GridMismatchError("frame grid points are not whole multiples of the spacing");
  }
  const auto n = static_cast<long long>(particle.points);
  const long long sign = direction == ShiftDirection::forward ? 1 : -1;
  std::vector<Complex> out(s.amplitudes.size());
  for (std::size_t i = 0; i < frame.points; ++i) {
    const long long cells = sign * (static_cast<long long>(std::llround(start)) + static_cast<long long>(i));
    const long long offset = ((cells % n) + n) % n;
    const Complex* row = s.amplitudes.data() + i * particle.points;
    Complex* dst = out.data() + i * particle.points;
    for (std::size_t j = 0; j < particle.points; ++j) dst[j] = row[(j + static_cast<std::size_t>(offset)) % particle.points];
  }
  s.amplitudes = std::move(out);
  return s;
}

// Checkpoint layout, little-endian:
//   char[8]  "QFGRID01"
//   uint32   rank
//   rank x { uint64 points; float64 min; float64 max }
//   float64  time
//   points   x { float32 re; float32 im }   (complex64, row-major)

namespace detail {

template <typename T>
void write_le(std::ostream& os, T value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw GridMismatchError("truncated checkpoint");
  return value;
}

}  // namespace detail

inline void write_checkpoint(const GridState& s, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw GridMismatchError("cannot open checkpoint '" + path + "' for writing");
  os.write("QFGRID01", 8);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.spec.rank()));
  for (const auto& a : s.spec.axes) {
    detail::write_le<std::uint64_t>(os, a.points);
    detail::write_le<double>(os, a.min);
    detail::write_le<double>(os, a.max);
  }
  detail::write_le<double>(os, s.time);
  for (const auto& v : s.amplitudes) {
    detail::write_le<float>(os, static_cast<float>(v.real()));
    detail::write_le<float>(os, static_cast<float>(v.imag()));
  }
}

inline GridState read_checkpoint(const std::string& path, const Units& units) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw GridMismatchError("cannot open checkpoint '" + path + "'");
  char magic[8];
  is.read(magic, 8);
  if (!is || std::string(magic, 8) != "QFGRID01") throw GridMismatchError("not a grid checkpoint: " + path);
  GridState s;
  s.units = units;
  const auto rank = detail::read_le<std::uint32_t>(is);
  for (std::uint32_t k = 0; k < rank; ++k) {
    GridAxis a;
    a.points = detail::read_le<std::uint64_t>(is);
    a.min = detail::read_le<double>(is);
    a.max = detail::read_le<double>(is);
    s.spec.axes.push_back(a);
  }
  s.spec.validate();
  s.time = detail::read_le<double>(is);
  s.amplitudes.resize(s.spec.size());
  for (auto& v : s.amplitudes) {
    const float re = detail::read_le<float>(is);
    const float im = detail::read_le<float>(is);
    v = {re, im};
  }
  return s;
}

}  // namespace qframes
