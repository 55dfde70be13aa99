#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <vector>

namespace qframes {

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// In-place complex FFT over a row-major 1D or 2D array. The plan is built
/// once with FFTW_UNALIGNED so it can run on any buffer of the same shape.
class FftPlan {
 public:
  explicit FftPlan(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    std::vector<int> n(shape_.begin(), shape_.end());
    std::size_t total = 1;
    for (auto s : shape_) total *= s;
    std::vector<std::complex<double>> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_.reset(fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, FFTW_FORWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED));
    backward_.reset(fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, FFTW_BACKWARD,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }

  void forward(std::vector<std::complex<double>>& data) const { run(forward_.get(), data); }
  /// Unnormalised inverse; the caller divides by the number of points.
  void backward(std::vector<std::complex<double>>& data) const { run(backward_.get(), data); }

 private:
  struct PlanDeleter {
    void operator()(fftw_plan_s* p) const {
      std::lock_guard lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(p);
    }
  };
  using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

  static void run(fftw_plan_s* plan, std::vector<std::complex<double>>& data) {
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
  }

  std::vector<std::size_t> shape_;
  Plan forward_;
  Plan backward_;
};

}  // namespace qframes
