#pragma once

#include <array>
#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

#include "nopo/core_model.hpp"

namespace nopo {

enum class NoiseKind { PositiveP, TruncatedWigner, Critical };

NoiseKind noise_kind(Representation rep);

/**
 * Wiener increments for one step.
 *   PositiveP:       dw = (dW1, dW2, dW1+, dW2+), <dW1 dW2> = <dW1+ dW2+> = dt
 *   TruncatedWigner: dw = (dW0, dW1, dW2, 0),   <dWi dWj*> = delta_ij dt
 *   Critical:        dw[0].real(), dw[1].real() are dw_plus, dw_minus
 */
struct NoiseBlock {
  NoiseKind kind = NoiseKind::PositiveP;
  std::array<cplx, 4> dw{};

  NoiseBlock& operator+=(const NoiseBlock& o) {
    for (int i = 0; i < 4; ++i) dw[i] += o.dw[i];
    return *this;
  }
};

// Independent Gaussian stream for one trajectory, keyed by (seed, index).
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t index);
  double operator()() { return dist_(engine_); }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> dist_;
};

NoiseBlock gen_noise(NoiseKind kind, NormalStream& rng, double dt);

}  // namespace nopo
