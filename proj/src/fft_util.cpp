#include "fft_util.hpp"

#include <mutex>
#include <new>

namespace nopo::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  FftBuffer tmp(n);
  std::lock_guard<std::mutex> lk(planner_mutex());
  auto* p = reinterpret_cast<fftw_complex*>(tmp.data());
  plan_ = fftw_plan_dft_1d(static_cast<int>(n), p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plan_) throw std::bad_alloc();
}

FftPlan::~FftPlan() {
  std::lock_guard<std::mutex> lk(planner_mutex());
  fftw_destroy_plan(plan_);
}

void FftPlan::execute(std::complex<double>* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan_, p, p);
}

FftBuffer::FftBuffer(std::size_t n) : n_(n) {
  p_ = static_cast<std::complex<double>*>(fftw_malloc(sizeof(std::complex<double>) * (n ? n : 1)));
  if (!p_) throw std::bad_alloc();
  for (std::size_t i = 0; i < n; ++i) p_[i] = 0.0;
}

FftBuffer::~FftBuffer() {
  if (p_) fftw_free(p_);
}

}  // namespace nopo::detail
