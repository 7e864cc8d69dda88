#include "nopo/epr.hpp"

#include <cmath>

#include "nopo/analytic.hpp"
#include "nopo/errors.hpp"

namespace nopo {
namespace {

void check_pair(double v0, double vpi2) {
  if (std::isnan(v0) || std::isnan(vpi2)) throw ParameterError("spectra must not be NaN");
  if (!(v0 > 0)) throw ParameterError("V0 must be > 0");
  if (vpi2 < 0) throw ParameterError("Vpi/2 must be >= 0");
}

}  // namespace

double inference_variance(double v0, double vpi2) {
  check_pair(v0, vpi2);
  if (std::isinf(vpi2)) throw DomainError("Vpi/2 must be finite");
  if (std::isinf(v0)) return 2 * vpi2;
  return 2 * v0 * vpi2 / (v0 + vpi2);
}

InferenceGains inference_gains(double v0, double vpi2) {
  check_pair(v0, vpi2);
  if (std::isinf(vpi2)) throw DomainError("Vpi/2 must be finite");
  double cx = std::isinf(v0) ? 1.0 : (v0 - vpi2) / (v0 + vpi2);
  return {cx, -cx};
}

bool epr_flag(double var_x, double var_y) { return var_x * var_y < 1.0; }
bool duan_simon_flag(double vpi2) { return vpi2 < 1.0; }
bool duan_sum(double var_dx, double var_dy) { return var_dx + var_dy < 4.0; }

EprReport epr_report(const std::vector<double>& omega, const std::vector<double>& v0,
                     const std::vector<double>& vpi2, const std::vector<double>& v0_se,
                     const std::vector<double>& vpi2_se) {
  const std::size_t n = omega.size();
  if (v0.size() != n || vpi2.size() != n || (!v0_se.empty() && v0_se.size() != n) ||
      (!vpi2_se.empty() && vpi2_se.size() != n))
    throw ContractError("epr_report: column lengths differ");
  auto se_or_zero = [](const std::vector<double>& v, std::size_t i) {
    return v.empty() || std::isnan(v[i]) ? 0.0 : v[i];
  };
  EprReport r;
  for (std::size_t i = 0; i < n; ++i) {
    EprBin b;
    b.omega = omega[i];
    b.v0 = v0[i];
    b.vpi2 = vpi2[i];
    b.v0_se = se_or_zero(v0_se, i);
    b.vpi2_se = se_or_zero(vpi2_se, i);
    b.inference = inference_variance(b.v0, b.vpi2);
    if (std::isinf(b.v0)) {
      b.inference_se = 2 * b.vpi2_se;
      b.heisenberg = b.vpi2 == 0 ? std::nan("") : b.v0;
    } else {
      double s = b.v0 + b.vpi2;
      double d0 = 2 * b.vpi2 * b.vpi2 / (s * s);
      double d1 = 2 * b.v0 * b.v0 / (s * s);
      b.inference_se = std::hypot(d0 * b.v0_se, d1 * b.vpi2_se);
      b.heisenberg = b.v0 * b.vpi2;
    }
    b.epr_product = b.inference * b.inference;
    b.gains = inference_gains(b.v0, b.vpi2);
    double upper = b.inference + b.inference_se;
    b.epr_demonstrated = epr_flag(upper, upper);
    b.entangled_duan_simon = duan_simon_flag(b.vpi2 + b.vpi2_se);
    r.bins.push_back(b);
  }
  return r;
}

EprReport epr_report(const SpectrumEstimate& est) {
  return epr_report(est.omega, est.v0, est.vpi2, est.v0_se, est.vpi2_se);
}

EprReport epr_report_analytic(double mu, double gamma_r, double g2, const std::vector<double>& omega) {
  std::vector<double> v0, vpi2;
  for (double w : omega) {
    auto s = spectrum_plusp(mu, gamma_r, g2, w);
    v0.push_back(s.v0);
    vpi2.push_back(s.vpi2);
  }
  return epr_report(omega, v0, vpi2);
}

}  // namespace nopo
