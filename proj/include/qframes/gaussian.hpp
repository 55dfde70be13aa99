#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "frames.hpp"
#include "models.hpp"
#include "series.hpp"

namespace qframes {

/// Pure or mixed Gaussian state: first moments and symmetrised covariance
/// Sigma_ij = <{dr_i, dr_j}> / 2.
struct GaussianState {
  CoordinateSystem coordinates;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double time = 0.0;

  std::size_t dimension() const { return static_cast<std::size_t>(mean.size()); }
};

struct PacketParameters {
  double position = 0.0;
  double momentum = 0.0;
  double width = 1.0;  // position standard deviation
};

/// Minimum-uncertainty product state.
inline GaussianState product_state(const CoordinateSystem& cs, const std::vector<PacketParameters>& packets,
                                   const Units& units) {
  if (packets.size() != cs.particles()) throw DimensionError("one packet per particle required");
  const double hbar = units.hbar_value();
  const auto n = static_cast<Eigen::Index>(cs.dimension());
  GaussianState s{cs, Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n), 0.0};
  for (std::size_t k = 0; k < packets.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(2 * k);
    s.mean(i) = packets[k].position;
    s.mean(i + 1) = packets[k].momentum;
    s.covariance(i, i) = packets[k].width * packets[k].width;
    s.covariance(i + 1, i + 1) = hbar * hbar / (4.0 * packets[k].width * packets[k].width);
  }
  return s;
}

/// Smallest eigenvalue of Sigma + i hbar J / 2; non-negative for physical states.
inline double uncertainty_margin(const GaussianState& s, const Units& units) {
  const Eigen::MatrixXd j = symplectic_form(s.dimension() / 2).to_eigen();
  const Eigen::MatrixXcd m = s.covariance.cast<std::complex<double>>() +
                             std::complex<double>(0.0, units.hbar_value() / 2.0) * j.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  return es.eigenvalues().minCoeff();
}

inline bool is_positive_definite(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

struct EvolveOptions {
  double sample_interval = 0.1;
  double max_step = 1e-3;  // RK4 step bound for time-dependent forcing
};

namespace detail {

inline Eigen::VectorXd forcing(const std::vector<Polynomial>& b, const Eigen::MatrixXd& j, double t) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) v(static_cast<Eigen::Index>(i)) = b[i].evaluate(t);
  return j * v;
}

}  // namespace detail

/// Moment flow dmu/dt = J (A mu + b(t)), dSigma/dt = (JA) Sigma + Sigma (JA)^T.
/// Constant b uses the exact matrix exponential of the affine generator;
/// time-dependent b falls back to classic RK4 with steps <= max_step.
/// Returns the samples t0, t0 + sample_interval, ..., t_final.
inline std::vector<GaussianState> evolve(const GaussianState& initial, const QuadraticHamiltonian& hamiltonian,
                                         double t_final, const EvolveOptions& opts = {}) {
  hamiltonian.validate();
  if (hamiltonian.dimension() != initial.dimension()) throw DimensionError("state and Hamiltonian dimensions differ");
  const QuadraticHamiltonian h = hamiltonian.folded();
  if (h.has_generic_potential()) throw NonQuadraticError("Gaussian evolution needs linear potentials only");

  const auto n = static_cast<Eigen::Index>(h.dimension());
  const Eigen::MatrixXd j = symplectic_form(h.dimension() / 2).to_eigen();
  const Eigen::MatrixXd ja = j * h.quadratic.to_eigen();
  bool constant_forcing = true;
  for (const auto& b : h.linear) constant_forcing = constant_forcing && b.is_constant();

  std::vector<GaussianState> out{initial};
  GaussianState s = initial;
  const double span = t_final - initial.time;
  const auto samples = static_cast<std::size_t>(std::llround(std::max(0.0, span) / opts.sample_interval));
  for (std::size_t k = 1; k <= samples; ++k) {
    const double t_next = initial.time + (k == samples ? span : static_cast<double>(k) * opts.sample_interval);
    const double dt = t_next - s.time;
    if (constant_forcing) {
      Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(n + 1, n + 1);
      gen.topLeftCorner(n, n) = ja;
      gen.topRightCorner(n, 1) = detail::forcing(h.linear, j, 0.0);
      const Eigen::MatrixXd flow = (gen * dt).exp();
      const Eigen::MatrixXd phi = flow.topLeftCorner(n, n);
      s.mean = phi * s.mean + flow.topRightCorner(n, 1);
      s.covariance = phi * s.covariance * phi.transpose();
    } else {
      const auto steps = static_cast<long>(std::ceil(dt / opts.max_step - 1e-9));
      const double step = dt / static_cast<double>(steps);
      auto mean_rate = [&](const Eigen::VectorXd& mu, double t) -> Eigen::VectorXd {
        return ja * mu + detail::forcing(h.linear, j, t);
      };
      auto cov_rate = [&](const Eigen::MatrixXd& sigma) -> Eigen::MatrixXd {
        return ja * sigma + sigma * ja.transpose();
      };
      for (long q = 0; q < steps; ++q) {
        const double t = s.time + static_cast<double>(q) * step;
        const Eigen::VectorXd k1 = mean_rate(s.mean, t);
        const Eigen::VectorXd k2 = mean_rate(s.mean + 0.5 * step * k1, t + 0.5 * step);
        const Eigen::VectorXd k3 = mean_rate(s.mean + 0.5 * step * k2, t + 0.5 * step);
        const Eigen::VectorXd k4 = mean_rate(s.mean + step * k3, t + step);
        s.mean += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const Eigen::MatrixXd c1 = cov_rate(s.covariance);
        const Eigen::MatrixXd c2 = cov_rate(s.covariance + 0.5 * step * c1);
        const Eigen::MatrixXd c3 = cov_rate(s.covariance + 0.5 * step * c2);
        const Eigen::MatrixXd c4 = cov_rate(s.covariance + step * c3);
        s.covariance += step / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
      }
    }
    s.covariance = 0.5 * (s.covariance + s.covariance.transpose());
    s.time = t_next;
    out.push_back(s);
  }
  return out;
}

/// Affine moment transport mu' = S mu + d(t), Sigma' = S Sigma S^T.
inline GaussianState map_state(const GaussianState& s, const AffineFrameMap& map) {
  if (map.dimension() != s.dimension()) throw DimensionError("map and state dimensions differ");
  const Eigen::MatrixXd sm = map.linear.to_eigen();
  GaussianState out;
  out.coordinates = map.target;
  out.time = s.time;
  out.mean = sm * s.mean;
  for (std::size_t i = 0; i < map.dimension(); ++i) out.mean(static_cast<Eigen::Index>(i)) += map.offset[i].evaluate(s.time);
  out.covariance = sm * s.covariance * sm.transpose();
  return out;
}

inline std::vector<double> mean_series(const std::vector<GaussianState>& traj, std::size_t axis) {
  std::vector<double> v;
  v.reserve(traj.size());
  for (const auto& s : traj) v.push_back(s.mean(static_cast<Eigen::Index>(axis)));
  return v;
}

struct AccelerationEstimate {
  double symbolic;        // Heisenberg form evaluated at the centre sample
  FiniteDifference numeric;  // Richardson second difference of the mean
  LinearForm form;
};

/// Both acceleration routes for one axis along a Gaussian trajectory.
inline AccelerationEstimate gaussian_acceleration(const std::vector<GaussianState>& traj,
                                                  const QuadraticHamiltonian& h, std::size_t axis) {
  AccelerationEstimate est{0.0, {0.0, 0.0}, heisenberg_acceleration(h, axis)};
  const std::size_t c = traj.size() / 2;
  est.symbolic = est.form.evaluate(traj.at(c).mean, traj.at(c).time);
  const auto series = mean_series(traj, axis);
  const double dt = traj.size() > 1 ? traj[1].time - traj[0].time : 0.0;
  est.numeric = fd_acceleration(series, dt);
  return est;
}

struct DoubleBoostReport {
  AccelerationEstimate first_frame;    // x' relative to S1
  AccelerationEstimate second_frame;   // x'' relative to S2
  double expected_first = 0.0;         // -Xddot_1 from the lab description
  double expected_second = 0.0;        // -Xddot_2 from the lab description
  double transport_mismatch = 0.0;     // max |map(evolve) - evolve(map)| over samples
  QuadraticHamiltonian first_hamiltonian;
  QuadraticHamiltonian second_hamiltonian;
};

/// Evolves relative to S1 (set1 coordinates without the centre-of-mass pair),
/// boosts to S2 and reads the particle's acceleration in both frames.
/// `initial` lives on (X2', P2', x', p').
inline DoubleBoostReport double_boost_check(const Rational& m1, const Rational& m2, const Rational& m,
                                            const models::LinearField& field, const GaussianState& initial,
                                            double t_final, const EvolveOptions& opts = {}) {
  const auto particles = models::three_body(m1, m2, m);
  const QuadraticHamiltonian lab = models::two_frames_and_particle(m1, m2, m, field);
  DoubleBoostReport r;
  r.first_hamiltonian = remove_pair(conjugate_hamiltonian(lab, builtin_map(BuiltinMap::set1, particles)), 0);
  const AffineFrameMap boost = remove_pair(builtin_map(BuiltinMap::double_boost, particles), 0);
  r.second_hamiltonian = conjugate_hamiltonian(r.first_hamiltonian, boost);
  if (initial.dimension() != 4) throw DimensionError("double boost state must be four-dimensional");

  const std::size_t x_axis = 2;
  const auto traj1 = evolve(initial, r.first_hamiltonian, t_final, opts);
  r.first_frame = gaussian_acceleration(traj1, r.first_hamiltonian, x_axis);

  const auto traj2 = evolve(map_state(initial, boost), r.second_hamiltonian, t_final, opts);
  r.second_frame = gaussian_acceleration(traj2, r.second_hamiltonian, x_axis);

  for (std::size_t k = 0; k < traj1.size(); ++k) {
    const GaussianState mapped = map_state(traj1[k], boost);
    r.transport_mismatch = std::max({r.transport_mismatch, (mapped.mean - traj2[k].mean).cwiseAbs().maxCoeff(),
                                     (mapped.covariance - traj2[k].covariance).cwiseAbs().maxCoeff()});
  }

  const auto frame1 = heisenberg_acceleration(lab, 0);
  const auto frame2 = heisenberg_acceleration(lab, 2);
  if (!frame1.is_constant() || !frame2.is_constant()) throw NonQuadraticError("frame accelerations are not uniform");
  r.expected_first = -frame1.constant.evaluate(0.0);
  r.expected_second = -frame2.constant.evaluate(0.0);
  return r;
}

/// Trajectory CSV: t, mean_1..mean_2N, then the upper triangle of Sigma
/// row by row (vech). Header names use the coordinate labels.
inline void write_trajectory_csv(const std::vector<GaussianState>& traj, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write trajectory '" + path + "'");
  if (traj.empty()) return;
  const auto& cs = traj.front().coordinates;
  const std::size_t n = traj.front().dimension();
  os << "t";
  for (std::size_t i = 0; i < n; ++i) os << ",mean_" << (cs.dimension() == n ? cs.axis_name(i) : std::to_string(i));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) os << ",cov_" << i << "_" << j;
  os << "\n";
  os.precision(17);
  for (const auto& s : traj) {
    os << s.time;
    for (std::size_t i = 0; i < n; ++i) os << "," << s.mean(static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) os << "," << s.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    os << "\n";
  }
}

}  // namespace qframes
