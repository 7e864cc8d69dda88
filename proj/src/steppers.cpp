#include "nopo/sde.hpp"

#include "nopo/errors.hpp"

namespace nopo {

std::string to_string(Scheme s) {
  return s == Scheme::EulerMaruyama ? "euler_maruyama" : "semi_implicit_midpoint";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "euler_maruyama" || s == "euler") return Scheme::EulerMaruyama;
  if (s == "semi_implicit_midpoint" || s == "semi_implicit") return Scheme::SemiImplicitMidpoint;
  throw ParameterError("unknown scheme '" + s + "'");
}

PhaseState step_plusp(const PhaseState& s, const PhysicalParams& p, const NoiseBlock& noise, double dt,
                      Scheme scheme) {
  if (s.rep != Representation::PositiveP) throw ContractError("step_plusp needs a PositiveP state");
  if (noise.kind != NoiseKind::PositiveP) throw ContractError("step_plusp needs PositiveP noise");
  detail::PlusPKernel k(rate_model(p));
  std::array<cplx, 6> a = s.amp;
  detail::advance(k, a, noise, dt, scheme);
  PhaseState out{Representation::PositiveP, a};
  if (!out.finite()) throw IntegrationFault("non-finite positive-P state", s);
  return out;
}

PhaseState step_wigner(const PhaseState& s, const PhysicalParams& p, const NoiseBlock& noise, double dt,
                       Scheme scheme) {
  if (s.rep != Representation::TruncatedWigner) throw ContractError("step_wigner needs a TruncatedWigner state");
  if (noise.kind != NoiseKind::TruncatedWigner) throw ContractError("step_wigner needs Wigner noise");
  detail::WignerKernel k(rate_model(p));
  std::array<cplx, 3> a{s.a0(), s.a1(), s.a2()};
  detail::advance(k, a, noise, dt, scheme);
  PhaseState out = PhaseState::wigner(a[0], a[1], a[2]);
  if (!out.finite()) throw IntegrationFault("non-finite Wigner state", s);
  return out;
}

std::array<double, 2> step_critical(const std::array<double, 2>& v, double eta, const NoiseBlock& noise,
                                    double dt) {
  double r2 = v[0] * v[0] + v[1] * v[1];
  double a = eta - 0.5 * r2;
  return {v[0] + a * v[0] * dt + noise.dw[0].real(), v[1] + a * v[1] * dt + noise.dw[1].real()};
}

std::array<double, 2> step_critical(const std::array<double, 2>& v, double eta, NormalStream& rng, double dt) {
  return step_critical(v, eta, gen_noise(NoiseKind::Critical, rng, dt), dt);
}

}  // namespace nopo
