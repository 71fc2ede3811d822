#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <span>
#include <utility>

#include "nqkr/errors.hpp"

namespace nqkr {

namespace detail {
// The FFTW planner is not thread-safe; execution is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// In-place forward/backward complex DFT pair of fixed length.
///
/// Plans use FFTW_ESTIMATE so that the chosen algorithm, and therefore every
/// rounding, is identical from run to run. FFTW_UNALIGNED lets the plans run
/// on any std::complex<double> buffer. Neither direction is scaled.
class FftPair {
 public:
  explicit FftPair(int n) : n_(n) {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_complex* probe = fftw_alloc_complex(static_cast<std::size_t>(n));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_1d(n, probe, probe, FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft_1d(n, probe, probe, FFTW_BACKWARD, flags);
    fftw_free(probe);
    if (forward_ == nullptr || backward_ == nullptr) {
      destroy();
      throw NumericalError("FFTW failed to create a plan of length " + std::to_string(n));
    }
  }

  FftPair(const FftPair&) = delete;
  FftPair& operator=(const FftPair&) = delete;
  FftPair(FftPair&& o) noexcept : n_(o.n_), forward_(o.forward_), backward_(o.backward_) {
    o.forward_ = o.backward_ = nullptr;
  }
  FftPair& operator=(FftPair&& o) noexcept {
    if (this != &o) {
      destroy();
      n_ = o.n_;
      forward_ = std::exchange(o.forward_, nullptr);
      backward_ = std::exchange(o.backward_, nullptr);
    }
    return *this;
  }
  ~FftPair() { destroy(); }

  int size() const noexcept { return n_; }

  /// x_k -> sum_j x_j exp(-2 pi i jk / n)
  void forward(std::span<std::complex<double>> data) const { run(forward_, data); }
  /// x_k -> sum_j x_j exp(+2 pi i jk / n)
  void backward(std::span<std::complex<double>> data) const { run(backward_, data); }

 private:
  void run(fftw_plan plan, std::span<std::complex<double>> data) const {
    if (static_cast<int>(data.size()) != n_) throw ConfigError("FFT length mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
  }

  void destroy() noexcept {
    if (forward_ == nullptr && backward_ == nullptr) return;
    std::lock_guard lock(detail::fftw_planner_mutex());
    if (forward_ != nullptr) fftw_destroy_plan(forward_);
    if (backward_ != nullptr) fftw_destroy_plan(backward_);
    forward_ = backward_ = nullptr;
  }

  int n_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace nqkr
