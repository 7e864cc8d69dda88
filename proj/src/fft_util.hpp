#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>

namespace nopo::detail {

// In-place backward (e^{+i}) transform of length n; execution is thread-safe.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  void execute(std::complex<double>* data) const;
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  fftw_plan plan_;
};

class FftBuffer {
 public:
  explicit FftBuffer(std::size_t n);
  ~FftBuffer();
  FftBuffer(FftBuffer&& o) noexcept : p_(o.p_), n_(o.n_) { o.p_ = nullptr; }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
  std::complex<double>* data() { return p_; }
  const std::complex<double>* data() const { return p_; }
  std::complex<double>& operator[](std::size_t i) { return p_[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return p_[i]; }
  std::size_t size() const { return n_; }

 private:
  std::complex<double>* p_;
  std::size_t n_;
};

}  // namespace nopo::detail
