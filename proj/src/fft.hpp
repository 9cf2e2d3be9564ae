// Thin RAII layer over FFTW's 3D real-to-complex transforms.
#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace spvar::detail {

/// Workspace for an n0 x n1 x n2 real transform. Plans are built once with
/// FFTW_ESTIMATE (deterministic) and reused; one workspace per thread.
class RealFFT3 {
 public:
  RealFFT3(int n0, int n1, int n2);
  ~RealFFT3();
  RealFFT3(const RealFFT3&) = delete;
  RealFFT3& operator=(const RealFFT3&) = delete;

  std::span<double> real() { return {real_, real_size()}; }
  std::span<std::complex<double>> spectrum() {
    return {reinterpret_cast<std::complex<double>*>(spec_), spec_size()};
  }
  std::size_t real_size() const { return static_cast<std::size_t>(n0_) * n1_ * n2_; }
  std::size_t spec_size() const { return static_cast<std::size_t>(n0_) * n1_ * (n2_ / 2 + 1); }
  int n0() const { return n0_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }

  void forward();  // real() -> spectrum()
  void inverse();  // spectrum() -> real(), unnormalised

 private:
  int n0_, n1_, n2_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

/// Per-thread cached workspace for a cubic transform of side n. The slot index
/// lets a caller hold two workspaces of the same size at once.
RealFFT3& cubic_workspace(int n, int slot = 0);

/// Signed integer frequency of index i on an n-point axis (Nyquist -> -n/2).
inline int frequency_index(int i, int n) { return i <= n / 2 - 1 ? i : i - n; }

}  // namespace spvar::detail
