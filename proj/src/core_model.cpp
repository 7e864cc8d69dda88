#include "nopo/core_model.hpp"

#include <cmath>
#include <limits>

#include "nopo/errors.hpp"

namespace nopo {

namespace {
constexpr cplx I{0.0, 1.0};
}

std::string to_string(Representation rep) {
  return rep == Representation::PositiveP ? "positive_p" : "wigner";
}

Representation representation_from_string(const std::string& s) {
  if (s == "positive_p" || s == "plusp" || s == "+P") return Representation::PositiveP;
  if (s == "wigner" || s == "truncated_wigner" || s == "W") return Representation::TruncatedWigner;
  throw ParameterError("unknown representation '" + s + "'");
}

bool ScaledParams::has_threshold() const { return std::isfinite(e_crit); }

bool PhaseState::finite() const {
  for (const auto& a : amp)
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
  return true;
}

PhaseState PhaseState::plusp(cplx a0, cplx a0p, cplx a1, cplx a1p, cplx a2, cplx a2p) {
  return {Representation::PositiveP, {a0, a0p, a1, a1p, a2, a2p}};
}

PhaseState PhaseState::wigner(cplx a0, cplx a1, cplx a2) {
  return {Representation::TruncatedWigner, {a0, std::conj(a0), a1, std::conj(a1), a2, std::conj(a2)}};
}

void validate(const PhysicalParams& p) {
  if (!(p.gamma0 > 0.0) || !std::isfinite(p.gamma0)) throw ParameterError("gamma0 must be positive and finite");
  if (!(p.gamma > 0.0) || !std::isfinite(p.gamma)) throw ParameterError("gamma must be positive and finite");
  if (!(p.chi >= 0.0) || !std::isfinite(p.chi)) throw ParameterError("chi must be non-negative and finite");
}

std::vector<std::string> validity_warnings(const PhysicalParams& p) {
  std::vector<std::string> w;
  if (p.chi / p.gamma > 0.1)
    w.push_back("chi/gamma = " + std::to_string(p.chi / p.gamma) + " > 0.1: weak-coupling expansion is doubtful");
  return w;
}

ScaledParams derive_scaled(const PhysicalParams& p) {
  validate(p);
  ScaledParams s;
  s.gamma_r = p.gamma0 / p.gamma;
  s.g = p.chi / (p.gamma * std::sqrt(2.0 * s.gamma_r));
  if (p.chi > 0.0) {
    s.e_crit = p.gamma * p.gamma0 / p.chi;
    s.mu = std::abs(p.drive) / s.e_crit;
  } else {
    s.e_crit = std::numeric_limits<double>::infinity();
    s.mu = 0.0;
  }
  return s;
}

PhysicalParams physical_from_scaled(double g2, double gamma_r, double mu, double gamma) {
  if (!(g2 >= 0.0) || !(gamma_r > 0.0) || !(mu >= 0.0) || !(gamma > 0.0))
    throw ParameterError("scaled parameters need g2 >= 0, gamma_r > 0, mu >= 0, gamma > 0");
  PhysicalParams p;
  p.gamma = gamma;
  p.gamma0 = gamma_r * gamma;
  p.chi = std::sqrt(g2) * gamma * std::sqrt(2.0 * gamma_r);
  if (p.chi > 0.0) {
    p.drive = mu * p.gamma * p.gamma0 / p.chi;
  } else if (mu > 0.0) {
    throw ParameterError("mu > 0 needs g2 > 0 (no threshold without coupling)");
  }
  return p;
}

RateModel rate_model(const PhysicalParams& p) {
  validate(p);
  return {p.gamma0 / p.gamma, p.chi / p.gamma, p.drive / p.gamma};
}

CriticalParams critical_params(const ScaledParams& sp, double gamma) {
  if (!(sp.g > 0.0)) throw ParameterError("critical scaling needs g > 0");
  return {2.0 * (sp.mu - 1.0) / sp.g, gamma * sp.g};
}

ClassicalState classical_steady_state(const PhysicalParams& p) {
  ScaledParams s = derive_scaled(p);
  if (!s.has_threshold() || s.mu < 1.0) return {p.drive / p.gamma0, 0.0, 0.0};
  double amp = std::abs(p.drive);
  cplx phase = amp > 0.0 ? p.drive / amp : cplx(1.0, 0.0);
  double n = (amp - s.e_crit) / p.chi;
  double a = std::sqrt(std::max(n, 0.0));
  return {s.e_crit / p.gamma0 * phase, a * phase, a};
}

std::array<cplx, 3> classical_drift(const PhysicalParams& p, const ClassicalState& s) {
  return {p.drive - p.gamma0 * s.a0 - p.chi * s.a1 * s.a2,
          -p.gamma * s.a1 + p.chi * std::conj(s.a2) * s.a0,
          -p.gamma * s.a2 + p.chi * std::conj(s.a1) * s.a0};
}

Quadratures natural_quadratures(const PhaseState& s, double theta) {
  cplx r = std::polar(1.0, -theta);
  cplx rc = std::conj(r);
  cplx a1 = s.a1() * r, a2 = s.a2() * r;
  cplx a1p = s.a1p() * rc, a2p = s.a2p() * rc;
  Quadratures q;
  q.X0 = s.a0() + s.a0p();
  q.Y0 = -I * (s.a0() - s.a0p());
  q.X = a1 + a2p;
  q.Y = -I * (a1 - a2p);
  q.Xp = a2 + a1p;
  q.Yp = -I * (a2 - a1p);
  return q;
}

QuadratureSample scale_quadratures(const Quadratures& q, double g, double gamma_r, double time) {
  double gp = g * std::sqrt(2.0 * gamma_r);
  return {time, gp * q.X0, gp * q.Y0, g * q.X, g * q.Y, g * q.Xp, g * q.Yp};
}

QuadratureSample quadratures_from_state(const PhaseState& s, double g, double gamma_r, double theta) {
  return scale_quadratures(natural_quadratures(s, theta), g, gamma_r);
}

Quadratures rotate(const Quadratures& q, double theta) {
  double c = std::cos(theta), sn = std::sin(theta);
  Quadratures r = q;
  r.X = c * q.X + sn * q.Y;
  r.Y = -sn * q.X + c * q.Y;
  r.Xp = c * q.Xp + sn * q.Yp;
  r.Yp = -sn * q.Xp + c * q.Yp;
  return r;
}

CriticalSample critical_rescale(const ScaledParams& sp, const QuadratureSample& q, Representation rep) {
  if (!(sp.g > 0.0)) throw ParameterError("critical rescaling needs g > 0");
  double g = sp.g;
  double sg = std::sqrt(g);
  CriticalSample c;
  c.eta = 2.0 * (sp.mu - 1.0) / g;
  c.x0 = (q.x0 - 2.0) / g;
  c.y0 = rep == Representation::PositiveP ? q.y0 / (g * sg) : q.y0 / g;
  c.x = q.x / sg;
  c.xp = q.xp / sg;
  c.y = q.y / g;
  c.yp = q.yp / g;
  return c;
}

}  // namespace nopo
