#pragma once

#include <cstdint>
#include <vector>

#include "nopo/spectra.hpp"

namespace nopo {

// Reduced threshold SDE for (x_plus, x_minus) in critical time.
struct CriticalConfig {
  double dt = 2e-3;
  double t_burn = 20.0;
  double t_record = 2000.0;
  std::size_t n_traj = 32;
  std::uint64_t seed = 1;
  double sample_interval = 0.05;
};

void validate(const CriticalConfig& c);

struct CriticalEstimate {
  double eta = 0.0;
  Estimate xx;  // <x+^2 + x-^2>
  std::size_t trajectories = 0;
  std::size_t samples = 0;
};

CriticalEstimate critical_ensemble(double eta, const CriticalConfig& cfg);

}  // namespace nopo
