#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "nopo/core_model.hpp"

namespace nopo {

/**
 * Output quadrature series (X, Y, X+, Y+) for one record interval.
 * +P: sqrt(2) times the internal quadratures; the vacuum "1" is added later.
 * Wigner: Phi_out = sqrt(2) a - dW / (sqrt(2) dt), vacuum already included.
 */
struct OutputFieldBuilder {
  Representation rep = Representation::PositiveP;
  double dt = 1.0;

  OutputFieldBuilder() = default;
  OutputFieldBuilder(Representation r, double d) : rep(r), dt(d) {}

  std::array<cplx, 4> operator()(const Quadratures& q, const std::array<cplx, 2>& dw) const {
    constexpr double r2 = std::numbers::sqrt2;
    if (rep == Representation::PositiveP) return {r2 * q.X, r2 * q.Y, r2 * q.Xp, r2 * q.Yp};
    const cplx i{0.0, 1.0};
    cplx a1 = 0.5 * (q.X + i * q.Y);
    cplx a2 = std::conj(0.5 * (q.X - i * q.Y));
    double s = 1.0 / (r2 * dt);
    cplx p1 = r2 * a1 - s * dw[0];
    cplx p2 = r2 * a2 - s * dw[1];
    return {p1 + std::conj(p2), -i * (p1 - std::conj(p2)), p2 + std::conj(p1), -i * (p2 - std::conj(p1))};
  }
};

}  // namespace nopo
