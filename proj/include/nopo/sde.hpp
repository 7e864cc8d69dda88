#pragma once

#include <array>
#include <stdexcept>

#include "nopo/core_model.hpp"
#include "nopo/noise.hpp"

namespace nopo {

enum class Scheme { EulerMaruyama, SemiImplicitMidpoint };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct IntegrationFault : std::runtime_error {
  IntegrationFault(const std::string& what, PhaseState last)
      : std::runtime_error(what), last_finite(last) {}
  PhaseState last_finite;
};

// One Ito step. dt is in scaled time tau = gamma t, noise variance dt.
PhaseState step_plusp(const PhaseState& s, const PhysicalParams& p, const NoiseBlock& noise, double dt,
                      Scheme scheme = Scheme::SemiImplicitMidpoint);
PhaseState step_wigner(const PhaseState& s, const PhysicalParams& p, const NoiseBlock& noise, double dt,
                       Scheme scheme = Scheme::SemiImplicitMidpoint);

// Reduced threshold equations for (x_plus, x_minus); Euler-Maruyama.
std::array<double, 2> step_critical(const std::array<double, 2>& v, double eta, const NoiseBlock& noise, double dt);
std::array<double, 2> step_critical(const std::array<double, 2>& v, double eta, NormalStream& rng, double dt);

namespace detail {

// Principal square root, branch cut on the negative real axis.
inline cplx fast_sqrt(cplx z) {
  double x = z.real(), y = z.imag();
  double r = std::sqrt(x * x + y * y);
  double re = std::sqrt(0.5 * (r + x));
  double im = std::sqrt(0.5 * std::max(r - x, 0.0));
  return {re, std::signbit(y) ? -im : im};
}

struct PlusPKernel {
  static constexpr int N = 6;
  double gr, k;
  cplx e, ep;

  explicit PlusPKernel(const RateModel& m) : gr(m.gamma_r), k(m.kappa), e(m.eps), ep(std::conj(m.eps)) {}

  void drift(const std::array<cplx, N>& a, std::array<cplx, N>& f) const {
    f[0] = e - gr * a[0] - k * a[2] * a[4];
    f[1] = ep - gr * a[1] - k * a[3] * a[5];
    f[2] = -a[2] + k * a[5] * a[0];
    f[3] = -a[3] + k * a[4] * a[1];
    f[4] = -a[4] + k * a[3] * a[0];
    f[5] = -a[5] + k * a[2] * a[1];
  }
  void noise(const std::array<cplx, N>& a, const NoiseBlock& w, std::array<cplx, N>& d) const {
    cplx b = fast_sqrt(k * a[0]);
    cplx bp = fast_sqrt(k * a[1]);
    d[0] = 0.0;
    d[1] = 0.0;
    d[2] = b * w.dw[0];
    d[4] = b * w.dw[1];
    d[3] = bp * w.dw[2];
    d[5] = bp * w.dw[3];
  }
};

// Linearisation about the classical below-threshold pump: (b1, b1+, b2, b2+).
struct PlusPShadowKernel {
  static constexpr int N = 4;
  cplx c, cp, sb, sbp;

  explicit PlusPShadowKernel(const RateModel& m) {
    cplx a0 = m.eps / m.gamma_r;
    c = m.kappa * a0;
    cp = m.kappa * std::conj(a0);
    sb = fast_sqrt(c);
    sbp = fast_sqrt(cp);
  }
  void drift(const std::array<cplx, N>& a, std::array<cplx, N>& f) const {
    f[0] = -a[0] + c * a[3];
    f[1] = -a[1] + cp * a[2];
    f[2] = -a[2] + c * a[1];
    f[3] = -a[3] + cp * a[0];
  }
  void noise(const std::array<cplx, N>&, const NoiseBlock& w, std::array<cplx, N>& d) const {
    d[0] = sb * w.dw[0];
    d[2] = sb * w.dw[1];
    d[1] = sbp * w.dw[2];
    d[3] = sbp * w.dw[3];
  }
};

// (a0, a1, a2) with conjugates implicit.
struct WignerKernel {
  static constexpr int N = 3;
  double gr, k, sgr;
  cplx e;

  explicit WignerKernel(const RateModel& m) : gr(m.gamma_r), k(m.kappa), sgr(std::sqrt(m.gamma_r)), e(m.eps) {}

  void drift(const std::array<cplx, N>& a, std::array<cplx, N>& f) const {
    f[0] = e - gr * a[0] - k * a[1] * a[2];
    f[1] = -a[1] + k * std::conj(a[2]) * a[0];
    f[2] = -a[2] + k * std::conj(a[1]) * a[0];
  }
  void noise(const std::array<cplx, N>&, const NoiseBlock& w, std::array<cplx, N>& d) const {
    d[0] = sgr * w.dw[0];
    d[1] = w.dw[1];
    d[2] = w.dw[2];
  }
};

// Pump fluctuation b0 plus signal/idler linearised about a0 = eps/gr.
struct WignerShadowKernel {
  static constexpr int N = 3;
  double gr, sgr;
  cplx c;

  explicit WignerShadowKernel(const RateModel& m)
      : gr(m.gamma_r), sgr(std::sqrt(m.gamma_r)), c(m.kappa * m.eps / m.gamma_r) {}

  void drift(const std::array<cplx, N>& a, std::array<cplx, N>& f) const {
    f[0] = -gr * a[0];
    f[1] = -a[1] + c * std::conj(a[2]);
    f[2] = -a[2] + c * std::conj(a[1]);
  }
  void noise(const std::array<cplx, N>&, const NoiseBlock& w, std::array<cplx, N>& d) const {
    d[0] = sgr * w.dw[0];
    d[1] = w.dw[1];
    d[2] = w.dw[2];
  }
};

// Noise coefficient frozen at the start point keeps the midpoint scheme Ito.
template <class K, std::size_t N>
inline void advance(const K& k, std::array<cplx, N>& s, const NoiseBlock& w, double dt, Scheme scheme) {
  std::array<cplx, N> dn, f;
  k.noise(s, w, dn);
  if (scheme == Scheme::EulerMaruyama) {
    k.drift(s, f);
    for (std::size_t i = 0; i < N; ++i) s[i] += f[i] * dt + dn[i];
    return;
  }
  std::array<cplx, N> mid = s;
  for (int it = 0; it < 3; ++it) {
    k.drift(mid, f);
    for (std::size_t i = 0; i < N; ++i) mid[i] = s[i] + 0.5 * (f[i] * dt + dn[i]);
  }
  for (std::size_t i = 0; i < N; ++i) s[i] = 2.0 * mid[i] - s[i];
}

}  // namespace detail
}  // namespace nopo
