#pragma once

#include "nopo/core_model.hpp"

namespace nopo {

struct SpectrumPair {
  double v0 = 1.0;
  double vpi2 = 1.0;
};

// Linearised output spectra; V0 is +inf at mu=1, omega=0.
SpectrumPair linear_spectra(double mu, double omega);
double heisenberg_product_linear(double mu, double omega);

// Order g^2 spectra, 0 <= mu < 1.
SpectrumPair spectrum_plusp(double mu, double gamma_r, double g2, double omega);
double vpi2_zero_plusp(double mu, double gamma_r, double g2);
double spectrum_wigner(double mu, double gamma_r, double g2, double omega);

struct MomentSetPP {
  double x0_2 = 0;
  double yy1 = 0;
  double xx1 = 0;
  double yy3 = 0;
  double triple = 0;
};

struct MomentSetW {
  double x0_2 = 0;
  double xx1 = 0;
  double yy1 = 0;
  double yy2 = 0;
  double yy3 = 0;
  double triple_sum = 0;
};

MomentSetPP moments_plusp(double mu, double gamma_r);
MomentSetW moments_wigner(double mu, double gamma_r);

// Normally ordered (+P) or symmetric (Wigner) intracavity squeezed moment.
double total_squeeze_moment(double mu, double gamma_r, double g2, Representation rep);
// The order g^2 part of the above.
double nl_squeeze_moment(double mu, double gamma_r, double g2, Representation rep);

// Coefficient of g^4 in <x(W1) y+(W2) y0(W3)>, W3 = -W1-W2, delta stripped.
cplx triple_plusp(double mu, double gamma_r, double omega1, double omega2);
// Full Wigner density including the g^4 factor.
cplx triple_wigner(double mu, double gamma_r, double omega1, double omega2, double g);

// <r^2> for the stationary density exp(eta r^2 - r^4/4).
double critical_xx(double eta);
double critical_squeeze_moment(double eta, double gamma_r, double g);

namespace detail {
double critical_squeeze_plusp_route(double eta, double gamma_r, double g);
double critical_squeeze_wigner_route(double eta, double gamma_r, double g);
}  // namespace detail

}  // namespace nopo
