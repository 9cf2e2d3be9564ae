#include "fft.hpp"

#include <map>
#include <mutex>
#include <new>
#include <utility>

namespace spvar::detail {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFFT3::RealFFT3(int n0, int n1, int n2) : n0_(n0), n1_(n1), n2_(n2) {
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(real_size());
  spec_ = fftw_alloc_complex(spec_size());
  if (real_ == nullptr || spec_ == nullptr) {
    fftw_free(real_);
    fftw_free(spec_);
    throw std::bad_alloc();
  }
  fwd_ = fftw_plan_dft_r2c_3d(n0, n1, n2, real_, spec_, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_c2r_3d(n0, n1, n2, spec_, real_, FFTW_ESTIMATE);
}

RealFFT3::~RealFFT3() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(fwd_);
  fftw_destroy_plan(inv_);
  fftw_free(real_);
  fftw_free(spec_);
}

void RealFFT3::forward() { fftw_execute(fwd_); }
// c2r destroys its input; callers never reuse the spectrum after inverse().
void RealFFT3::inverse() { fftw_execute(inv_); }

RealFFT3& cubic_workspace(int n, int slot) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<RealFFT3>> cache;
  auto& entry = cache[{n, slot}];
  if (!entry) entry = std::make_unique<RealFFT3>(n, n, n);
  return *entry;
}

}  // namespace spvar::detail
