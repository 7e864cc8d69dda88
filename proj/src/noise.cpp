#include "nopo/noise.hpp"

#include <cmath>

namespace nopo {

NoiseKind noise_kind(Representation rep) {
  return rep == Representation::PositiveP ? NoiseKind::PositiveP : NoiseKind::TruncatedWigner;
}

namespace {
std::seed_seq make_seq(std::uint64_t seed, std::uint64_t index) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  return std::seed_seq{lo(seed), hi(seed), lo(index), hi(index), 0x6e6f706fu};
}
}  // namespace

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t index) {
  auto seq = make_seq(seed, index);
  engine_.seed(seq);
}

NoiseBlock gen_noise(NoiseKind kind, NormalStream& rng, double dt) {
  NoiseBlock b;
  b.kind = kind;
  if (dt <= 0.0) return b;
  const double s = std::sqrt(dt);
  const double h = std::sqrt(0.5 * dt);
  switch (kind) {
    case NoiseKind::PositiveP: {
      double u = rng(), v = rng(), up = rng(), vp = rng();
      b.dw[0] = {h * u, h * v};
      b.dw[1] = {h * u, -h * v};
      b.dw[2] = {h * up, h * vp};
      b.dw[3] = {h * up, -h * vp};
      break;
    }
    case NoiseKind::TruncatedWigner:
      for (int j = 0; j < 3; ++j) {
        double u = rng(), v = rng();
        b.dw[j] = {h * u, h * v};
      }
      break;
    case NoiseKind::Critical:
      b.dw[0] = s * rng();
      b.dw[1] = s * rng();
      break;
  }
  return b;
}

}  // namespace nopo
