#include "nopo/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nopo/errors.hpp"

namespace nopo {
namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ParameterError(std::string(name) + " must be finite");
}

void require_below(double mu) {
  require_finite(mu, "mu");
  if (mu < 0) throw ParameterError("mu must be >= 0");
  if (mu >= 1) throw DomainError("perturbative result diverges for mu >= 1");
}

void require_rates(double gamma_r, double g2) {
  require_finite(gamma_r, "gamma_r");
  require_finite(g2, "g2");
  if (gamma_r <= 0) throw ParameterError("gamma_r must be > 0");
  if (g2 < 0) throw ParameterError("g2 must be >= 0");
}

double sq(double x) { return x * x; }

const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

}  // namespace

SpectrumPair linear_spectra(double mu, double omega) {
  require_finite(mu, "mu");
  require_finite(omega, "omega");
  if (mu < 0) throw ParameterError("mu must be >= 0");
  const double w2 = omega * omega;
  const double dm = w2 + sq(1 - mu);
  SpectrumPair r;
  r.vpi2 = 1 - 4 * mu / (w2 + sq(1 + mu));
  r.v0 = dm == 0 ? std::numeric_limits<double>::infinity() : 1 + 4 * mu / dm;
  return r;
}

double heisenberg_product_linear(double mu, double omega) {
  auto s = linear_spectra(mu, omega);
  return s.v0 * s.vpi2;
}

SpectrumPair spectrum_plusp(double mu, double gamma_r, double g2, double omega) {
  require_below(mu);
  require_rates(gamma_r, g2);
  require_finite(omega, "omega");
  const double w2 = omega * omega;
  const double dp = w2 + sq(1 + mu);
  const double dm = w2 + sq(1 - mu);
  const double a = 1 - mu + gamma_r;
  const double b = 1 + mu + gamma_r;
  const double lead = (w2 + 1 - mu * mu) / (1 - mu * mu);
  const double mg = mu * gamma_r;

  SpectrumPair r = linear_spectra(mu, omega);
  const double sq_br = lead + mg * ((a * (1 + mu) - w2) / ((1 - mu) * (w2 + a * a)) -
                                    (b * (1 + mu) - w2) / ((1 + mu) * (w2 + b * b)));
  const double un_br = lead + mg * ((a * (1 - mu) - w2) / ((1 - mu) * (w2 + a * a)) -
                                    (b * (1 - mu) - w2) / ((1 + mu) * (w2 + b * b)));
  r.vpi2 += 4 * g2 * mu / (dp * dp) * sq_br;
  r.v0 -= 4 * g2 * mu / (dm * dm) * un_br;
  return r;
}

double vpi2_zero_plusp(double mu, double gamma_r, double g2) {
  require_below(mu);
  require_rates(gamma_r, g2);
  const double p = 1 + mu;
  return 1 - 4 * mu / (p * p) +
         4 * g2 * mu / std::pow(p, 4) *
             (1 + 2 * mu * mu * gamma_r * (2 + gamma_r) /
                      ((1 - mu) * (sq(1 + gamma_r) - mu * mu)));
}

double spectrum_wigner(double mu, double gamma_r, double g2, double omega) {
  require_below(mu);
  require_rates(gamma_r, g2);
  require_finite(omega, "omega");
  const double w2 = omega * omega;
  const double dp = w2 + sq(1 + mu);
  const double a = 1 - mu + gamma_r;
  const double b = 1 + mu + gamma_r;
  const double m2 = mu * mu, m3 = m2 * mu;
  const double t1 = 2 * mu * (1 + w2 - m2) / (gamma_r * (1 - m2));
  const double t2 = (((1 - mu) * a - 2 * m2) * w2 + a * (1 + mu + m2 + m3)) /
                    ((1 - mu) * (w2 + a * a));
  const double t3 = (((1 + mu) * b + 2 * m2) * w2 + b * (1 + 3 * mu + m2 - m3)) /
                    ((1 + mu) * (w2 + b * b));
  return 1 - 4 * mu / dp + 2 * g2 * gamma_r / (dp * dp) * (t1 + t2 + t3);
}

MomentSetPP moments_plusp(double mu, double gamma_r) {
  require_below(mu);
  require_rates(gamma_r, 0);
  const double m2 = mu * mu;
  const double gr = gamma_r;
  MomentSetPP m;
  m.x0_2 = -2 * m2 / (1 - m2);
  m.yy1 = -mu / (1 + mu);
  m.xx1 = mu / (1 - mu);
  m.yy3 = mu / (4 * (1 + mu) * (1 - m2)) *
          (mu * gr / (gr + 2) +
           (gr * (2 - mu + m2) + 4 * (1 + mu)) / ((1 + mu) * (gr + 2 * (1 + mu))));
  m.triple = m2 / (1 - m2) * gr / (gr + 2);
  return m;
}

MomentSetW moments_wigner(double mu, double gamma_r) {
  require_below(mu);
  require_rates(gamma_r, 0);
  const double m2 = mu * mu;
  const double gr = gamma_r;
  const double p = 1 + mu, q = 1 - mu;
  MomentSetW m;
  m.x0_2 = -2 * m2 / (1 - m2);
  m.xx1 = 1 / q;
  m.yy1 = 1 / p;
  m.yy2 = gr / (2 * q * p * (gr + 2)) + gr / (2 * p * p * (gr + 2 * p));
  m.yy3 = -mu * gr / (4 * q * p * p * (gr + 2)) + mu / (2 * q * p * p * p) +
          mu * gr / (4 * p * p * p * (gr + 2 * p));
  m.triple_sum = gr / ((1 - m2) * (gr + 2));
  return m;
}

double nl_squeeze_moment(double mu, double gamma_r, double g2, Representation rep) {
  require_below(mu);
  require_rates(gamma_r, g2);
  const double m2 = mu * mu;
  const double gr = gamma_r;
  const double p = 1 + mu;
  if (rep == Representation::PositiveP) {
    return g2 * mu / (2 * p * (1 - m2)) *
           (mu * gr / (gr + 2) +
            (gr * (2 - mu + m2) + 4 * p) / (p * (gr + 2 * p)));
  }
  return g2 / (2 * p * (1 - m2)) *
         (gr / (gr + 2) + (gr * (1 + 3 * mu - 2 * m2) + 4 * mu * p) / (p * (gr + 2 * p)));
}

double total_squeeze_moment(double mu, double gamma_r, double g2, Representation rep) {
  return 1 / (1 + mu) + nl_squeeze_moment(mu, gamma_r, g2, rep);
}

cplx triple_plusp(double mu, double gamma_r, double omega1, double omega2) {
  require_below(mu);
  require_rates(gamma_r, 0);
  const double o3 = -omega1 - omega2;
  const cplx den = cplx(gamma_r, -o3) * (sq(omega1) + sq(1 - mu)) * (sq(omega2) + sq(1 + mu));
  return 4 * mu * mu * gamma_r * inv_sqrt_2pi / den;
}

cplx triple_wigner(double mu, double gamma_r, double omega1, double omega2, double g) {
  require_below(mu);
  require_rates(gamma_r, 0);
  require_finite(g, "g");
  const double o3 = -omega1 - omega2;
  const double l1 = sq(omega1) + sq(1 - mu);
  const double l2 = sq(omega2) + sq(1 + mu);
  const double l3 = sq(o3) + sq(gamma_r);
  const cplx braces = -1.0 / (cplx(gamma_r, -o3) * l1 * l2) +
                      gamma_r / (cplx(1 - mu, -omega1) * l2 * l3) +
                      gamma_r / (cplx(1 + mu, -omega2) * l1 * l3);
  return std::pow(g, 4) * 4 * gamma_r * inv_sqrt_2pi * braces;
}

double critical_xx(double eta) {
  require_finite(eta, "eta");
  using boost::math::quadrature::gauss_kronrod;
  const double u_max = std::max(50.0, 2 * eta + 30 * std::sqrt(std::max(eta, 1.0)));
  // log-weight peak, subtracted to keep the integrand O(1)
  const double peak = eta > 0 ? eta * eta : 0.0;
  auto w = [&](double u) { return std::exp(eta * u - u * u / 4 - peak); };

  std::vector<double> cuts{0.0};
  if (eta < 0) {
    double s = 40.0 / -eta;
    while (s < u_max) {
      cuts.push_back(s);
      s *= 4;
    }
  } else {
    for (double c : {2 * eta - 20, 2 * eta, 2 * eta + 20})
      if (c > cuts.back() && c < u_max) cuts.push_back(c);
  }
  cuts.push_back(u_max);

  double num = 0, den = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0;
    den += gauss_kronrod<double, 61>::integrate(w, cuts[i], cuts[i + 1], 15, 1e-14, &err);
    num += gauss_kronrod<double, 61>::integrate([&](double u) { return u * w(u); }, cuts[i],
                                                cuts[i + 1], 15, 1e-14, &err);
  }
  return num / den;
}

double critical_squeeze_moment(double eta, double gamma_r, double g) {
  require_finite(g, "g");
  require_rates(gamma_r, 0);
  return 0.5 - g * eta / 4 + g / 8 * ((2 + 2 * gamma_r) / (2 + gamma_r)) * critical_xx(eta);
}

namespace detail {

double critical_squeeze_plusp_route(double eta, double gamma_r, double g) {
  const double xx = critical_xx(eta);
  const double x0_mean = 2 * eta - xx;
  const double first = 0.5 * x0_mean;
  const double y0z = gamma_r / (2 + gamma_r) * xx;
  return 0.5 - g / 4 * (first - 0.5 * y0z);
}

double critical_squeeze_wigner_route(double eta, double gamma_r, double g) {
  const double xx = critical_xx(eta);
  const double yy0 = 0.5;
  const double z2 = 2 * xx * yy0;
  const double y0sq = 2 * gamma_r;
  const double sg = std::sqrt(g);
  const double y0z = sg * (-gamma_r * z2 + y0sq * xx) / (2 + gamma_r);
  const double x0yy = 0.5 * (2 * eta - xx);
  return 0.5 + sg / 8 * y0z - g / 4 * x0yy;
}

}  // namespace detail

}  // namespace nopo
