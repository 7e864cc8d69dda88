#pragma once

#include <vector>

#include "nopo/spectra.hpp"

namespace nopo {

// Linear inference variance 2 V0 Vpi2 / (V0 + Vpi2); V0 = +inf gives 2 Vpi2.
double inference_variance(double v0, double vpi2);

struct InferenceGains {
  double cx = 0.0;
  double cy = 0.0;
};
InferenceGains inference_gains(double v0, double vpi2);

bool epr_flag(double var_x, double var_y);
bool duan_simon_flag(double vpi2);
bool duan_sum(double var_dx, double var_dy);

struct EprBin {
  double omega = 0.0;
  double v0 = 1.0, v0_se = 0.0;
  double vpi2 = 1.0, vpi2_se = 0.0;
  double inference = 1.0, inference_se = 0.0;
  double epr_product = 1.0;
  double heisenberg = 1.0;
  InferenceGains gains;
  bool epr_demonstrated = false;
  bool entangled_duan_simon = false;
};

struct EprReport {
  std::vector<EprBin> bins;
};

/**
 * Per-bin criteria. Flags are conservative: a value counts as below 1 only
 * when value + se < 1.
 */
EprReport epr_report(const SpectrumEstimate& est);
EprReport epr_report(const std::vector<double>& omega, const std::vector<double>& v0,
                     const std::vector<double>& vpi2, const std::vector<double>& v0_se = {},
                     const std::vector<double>& vpi2_se = {});
// Closed-form +P spectra, no sampling error.
EprReport epr_report_analytic(double mu, double gamma_r, double g2, const std::vector<double>& omega);

}  // namespace nopo
