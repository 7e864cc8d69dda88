#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace nopo {

using cplx = std::complex<double>;

enum class Representation { PositiveP, TruncatedWigner };

std::string to_string(Representation rep);
Representation representation_from_string(const std::string& s);

struct PhysicalParams {
  double gamma0 = 1.0;  // pump amplitude decay rate
  double gamma = 1.0;   // signal/idler decay rate
  double chi = 0.0;     // nonlinear coupling
  cplx drive{0.0, 0.0};
};

struct ScaledParams {
  double gamma_r = 1.0;
  double mu = 0.0;
  double g = 0.0;
  double e_crit = 0.0;  // +inf when chi == 0

  bool has_threshold() const;
};

struct CriticalParams {
  double eta = 0.0;
  double tau_scale = 0.0;  // multiplies physical time t to give the critical time
};

/**
 * One trajectory's amplitudes. Slot order is (a0, a0+, a1, a1+, a2, a2+).
 * For TruncatedWigner only slots 0, 2, 4 are used and the "+" accessors
 * return complex conjugates.
 */
struct PhaseState {
  Representation rep = Representation::PositiveP;
  std::array<cplx, 6> amp{};

  cplx a0() const { return amp[0]; }
  cplx a1() const { return amp[2]; }
  cplx a2() const { return amp[4]; }
  cplx a0p() const { return rep == Representation::PositiveP ? amp[1] : std::conj(amp[0]); }
  cplx a1p() const { return rep == Representation::PositiveP ? amp[3] : std::conj(amp[2]); }
  cplx a2p() const { return rep == Representation::PositiveP ? amp[5] : std::conj(amp[4]); }

  bool finite() const;

  static PhaseState plusp(cplx a0, cplx a0p, cplx a1, cplx a1p, cplx a2, cplx a2p);
  static PhaseState wigner(cplx a0, cplx a1, cplx a2);
};

// Unscaled quadratures X = a1 + a2+, Y = (a1 - a2+)/i and the pump pair.
struct Quadratures {
  cplx X0, Y0, X, Y, Xp, Yp;
};

// Scaled quadratures: x0 = g sqrt(2 gr) X0, x = g X, and so on.
struct QuadratureSample {
  double time = 0.0;
  cplx x0, y0, x, y, xp, yp;
};

struct CriticalSample {
  double eta = 0.0;
  cplx x0, y0, x, y, xp, yp;
};

// Rates rescaled by gamma: time is tau = gamma t, amplitudes stay unscaled.
struct RateModel {
  double gamma_r = 1.0;
  double kappa = 0.0;  // chi / gamma
  cplx eps{0.0, 0.0};  // drive / gamma
};

void validate(const PhysicalParams& p);
std::vector<std::string> validity_warnings(const PhysicalParams& p);

ScaledParams derive_scaled(const PhysicalParams& p);
PhysicalParams physical_from_scaled(double g2, double gamma_r, double mu, double gamma = 1.0);
RateModel rate_model(const PhysicalParams& p);

CriticalParams critical_params(const ScaledParams& sp, double gamma);

struct ClassicalState {
  cplx a0, a1, a2;
};
ClassicalState classical_steady_state(const PhysicalParams& p);

// Classical drift d(a0, a1, a2)/dt in physical time.
std::array<cplx, 3> classical_drift(const PhysicalParams& p, const ClassicalState& s);

Quadratures natural_quadratures(const PhaseState& s, double theta = 0.0);
QuadratureSample scale_quadratures(const Quadratures& q, double g, double gamma_r, double time = 0.0);
QuadratureSample quadratures_from_state(const PhaseState& s, double g, double gamma_r, double theta = 0.0);

// Homodyne rotation of recorded quadrature pairs: X^theta = cos X + sin Y.
Quadratures rotate(const Quadratures& q, double theta);

CriticalSample critical_rescale(const ScaledParams& sp, const QuadratureSample& q, Representation rep);

}  // namespace nopo
