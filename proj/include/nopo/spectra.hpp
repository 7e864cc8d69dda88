#pragma once

#include <complex>
#include <memory>
#include <utility>
#include <vector>

#include "nopo/core_model.hpp"
#include "nopo/ensemble.hpp"

namespace nopo {

struct SpectralSettings {
  double t_seg = 100.0;
  double omega_max = 10.0;
  std::size_t band = 1;  // adjacent DFT bins averaged into one reported bin
  std::vector<double> thetas;
};

void validate(const SpectralSettings& s);

struct SpectrumEstimate {
  Representation rep = Representation::PositiveP;
  double t_seg = 0.0;
  double d_omega = 0.0;  // DFT spacing 2 pi / t_seg
  std::size_t band = 1;
  std::size_t segments = 0;  // per trajectory
  std::size_t trajectories = 0;

  std::vector<double> omega;  // band centres
  std::vector<double> v0, v0_se, vpi2, vpi2_se;
  std::vector<double> thetas;
  std::vector<std::vector<double>> vtheta, vtheta_se;

  // Full minus linearised companion, same noise (set when the run had a shadow).
  bool has_differenced = false;
  std::vector<double> nl_v0, nl_v0_se, nl_vpi2, nl_vpi2_se;

  double max_imag = 0.0;  // largest |Im| dropped from a Wigner estimate, relative to |Re|
};

// Average f(Omega_k) over the DFT frequencies that make up each reported bin.
template <class F>
std::vector<double> band_average(const SpectrumEstimate& est, F f) {
  std::vector<double> out(est.omega.size(), 0.0);
  for (std::size_t b = 0; b < out.size(); ++b) {
    double s = 0.0;
    for (std::size_t j = 0; j < est.band; ++j) s += f(static_cast<double>(b * est.band + j) * est.d_omega);
    out[b] = s / static_cast<double>(est.band);
  }
  return out;
}

struct CrossSpectrum {
  std::vector<double> omega;
  std::vector<cplx> value;
  std::size_t segments = 0;
};

/**
 * Segmented periodogram (rectangular window, no overlap) of two sampled series:
 * S(Omega_k) = (2 pi / T_seg) < a~(Omega_k) b~(-Omega_k) >, with
 * a~(Omega) = sum_n dt e^{i Omega t_n} a_n / sqrt(2 pi). Means are removed first.
 * omega_max < 0 keeps every bin up to Nyquist.
 */
CrossSpectrum cross_spectrum(const std::vector<cplx>& a, const std::vector<cplx>& b, double dt_record, double t_seg,
                             double omega_max = -1.0);

class SpectrumReducer : public EnsembleReducer {
 public:
  explicit SpectrumReducer(SpectralSettings s);
  ~SpectrumReducer() override;
  void begin(const RunInfo& info) override;
  std::unique_ptr<FrameConsumer> start(std::size_t traj) override;
  void finish(std::size_t traj, std::unique_ptr<FrameConsumer> c, bool faulted) override;
  SpectrumEstimate result() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

SpectrumEstimate squeezing_spectra(const EnsembleResult& ens, const SpectralSettings& s);

struct Residual {
  std::vector<double> omega, value, se;
};

// Squeezed spectrum minus the band-averaged linear spectrum.
Residual nonlinear_residual(const SpectrumEstimate& est, double mu);
// Differenced estimate (full minus linear companion), when available.
Residual differenced_residual(const SpectrumEstimate& est);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/**
 * Stationary moments. Natural quadratures X = a1 + a2+ etc.; "scaled" ones
 * follow x = g X, x0 = g sqrt(2 gr) X0.
 */
struct MomentEstimate {
  Estimate x0;          // <x0>
  Estimate x0_2;        // (<x0> - 2 mu) / g^2
  Estimate xx;          // <X X+>   = <x x+> / g^2
  Estimate yy;          // <Y Y+>
  Estimate total;       // <Y1 Y1+>: 1 + <Y Y+> (+P) or <Y Y*> (Wigner)
  Estimate triple;      // <x y+ y0> / g^4
  Estimate xx_scaled;   // <x x+>
  std::size_t trajectories = 0;
  std::size_t samples = 0;
};

class MomentReducer : public EnsembleReducer {
 public:
  MomentReducer();
  ~MomentReducer() override;
  void begin(const RunInfo& info) override;
  std::unique_ptr<FrameConsumer> start(std::size_t traj) override;
  void finish(std::size_t traj, std::unique_ptr<FrameConsumer> c, bool faulted) override;
  MomentEstimate result() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

MomentEstimate intracavity_moments(const EnsembleResult& ens);

struct TripleGrid {
  std::vector<std::pair<int, int>> bins;  // (k1, k2) in units of 2 pi / t_seg
  double t_seg = 100.0;
};

// Square grid k1, k2 in [-half, half].
TripleGrid square_triple_grid(int half, double t_seg);

struct TripleCorrEstimate {
  std::vector<double> omega1, omega2;
  std::vector<cplx> value;        // density of < x~ y+~ y0~ > in scaled quadratures
  std::vector<double> se_re, se_im, se;  // se: complex standard error sqrt(se_re^2 + se_im^2)
  std::size_t trajectories = 0;
  std::size_t segments = 0;
};

class TripleReducer : public EnsembleReducer {
 public:
  explicit TripleReducer(TripleGrid grid);
  ~TripleReducer() override;
  void begin(const RunInfo& info) override;
  std::unique_ptr<FrameConsumer> start(std::size_t traj) override;
  void finish(std::size_t traj, std::unique_ptr<FrameConsumer> c, bool faulted) override;
  TripleCorrEstimate result() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

TripleCorrEstimate triple_spectrum(const EnsembleResult& ens, const TripleGrid& grid);

// Running mean / standard error over trajectories, merged in a fixed order.
struct MeanAcc {
  double n = 0.0, mean = 0.0, m2 = 0.0;
  void add(double v) {
    n += 1.0;
    double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
  // se is NaN with fewer than two samples.
  Estimate get() const;
};

}  // namespace nopo
