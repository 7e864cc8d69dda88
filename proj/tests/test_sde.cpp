#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "nopo/ensemble.hpp"
#include "nopo/errors.hpp"
#include "nopo/noise.hpp"
#include "nopo/sde.hpp"

using namespace nopo;

namespace {

struct Moments {
  double mean = 0, m2 = 0;
  int n = 0;
  void add(double v) {
    ++n;
    double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
  double se() const { return std::sqrt(m2 / (n - 1) / n); }
};

struct ScopedEnv {
  std::string name;
  ScopedEnv(const char* n, const char* v) : name(n) { setenv(n, v, 1); }
  ~ScopedEnv() { unsetenv(name.c_str()); }
};

bool same_frames(const EnsembleResult& a, const EnsembleResult& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& fa = a.records[i].frames;
    const auto& fb = b.records[i].frames;
    if (fa.size() != fb.size()) return false;
    for (std::size_t j = 0; j < fa.size(); ++j) {
      const auto &p = fa[j].mean, &q = fb[j].mean;
      if (p.X != q.X || p.Y != q.Y || p.Xp != q.Xp || p.Yp != q.Yp || p.X0 != q.X0 || p.Y0 != q.Y0) return false;
      if (fa[j].noise != fb[j].noise) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("sde") {

TEST_CASE("noise blocks: zero step and correlations") {
  NormalStream rng(7, 0);
  auto z = gen_noise(NoiseKind::PositiveP, rng, 0.0);
  for (auto v : z.dw) CHECK(std::abs(v) == 0);

  const int M = 100000;
  const double dt = 0.01;
  Moments c12r, c12i, c11r, c11i, cpr, cross;
  for (int i = 0; i < M; ++i) {
    auto w = gen_noise(NoiseKind::PositiveP, rng, dt);
    cplx a = w.dw[0] * w.dw[1] / dt, b = w.dw[0] * w.dw[0] / dt, c = w.dw[2] * w.dw[3] / dt;
    c12r.add(a.real());
    c12i.add(a.imag());
    c11r.add(b.real());
    c11i.add(b.imag());
    cpr.add(c.real());
    cross.add((w.dw[0] * w.dw[2] / dt).real());
  }
  CHECK(std::abs(c12r.mean - 1) < 4 * c12r.se());
  CHECK(c12i.mean == 0);  // dW1 dW2 = h^2 (u^2 + v^2) is real
  CHECK(std::abs(c11r.mean) < 4 * c11r.se());
  CHECK(std::abs(c11i.mean) < 4 * c11i.se());
  CHECK(std::abs(cpr.mean - 1) < 4 * cpr.se());
  CHECK(std::abs(cross.mean) < 4 * cross.se());

  Moments w11, w12r, w12i, wsq;
  for (int i = 0; i < M; ++i) {
    auto w = gen_noise(NoiseKind::TruncatedWigner, rng, dt);
    w11.add(std::norm(w.dw[1]) / dt);
    cplx x = w.dw[1] * std::conj(w.dw[2]) / dt;
    w12r.add(x.real());
    w12i.add(x.imag());
    wsq.add((w.dw[1] * w.dw[1]).real() / dt);
  }
  CHECK(std::abs(w11.mean - 1) < 4 * w11.se());
  CHECK(std::abs(w12r.mean) < 4 * w12r.se());
  CHECK(std::abs(w12i.mean) < 4 * w12i.se());
  CHECK(std::abs(wsq.mean) < 4 * wsq.se());
}

TEST_CASE("streams are keyed by seed and index") {
  NormalStream a(1, 5), b(1, 5), c(1, 6), d(2, 5);
  double x = a(), y = b(), u = c(), v = d();
  CHECK(x == y);
  CHECK(x != u);
  CHECK(x != v);
}

TEST_CASE("positive-P step examples") {
  PhysicalParams vac{1, 1, 0.1, {0, 0}};
  NormalStream rng(3, 0);
  PhaseState s = PhaseState::plusp(0, 0, 0, 0, 0, 0);
  for (int i = 0; i < 100; ++i) s = step_plusp(s, vac, gen_noise(NoiseKind::PositiveP, rng, 0.01), 0.01);
  for (auto v : s.amp) CHECK(std::abs(v) == 0);

  // drift-only Euler step against the classical drift
  PhysicalParams p{0.8, 1, 0.07, {3, 0.5}};
  auto st = PhaseState::plusp({2, 1}, {2, -1}, {0.3, 0.2}, {0.3, -0.2}, {-0.1, 0.4}, {-0.1, -0.4});
  NoiseBlock zero{NoiseKind::PositiveP, {}};
  double dt = 1e-3;
  auto n = step_plusp(st, p, zero, dt, Scheme::EulerMaruyama);
  auto d = classical_drift(p, {st.a0(), st.a1(), st.a2()});
  CHECK(std::abs(n.a0() - (st.a0() + d[0] * dt)) <= 1e-12);
  CHECK(std::abs(n.a1() - (st.a1() + d[1] * dt)) <= 1e-12);
  CHECK(std::abs(n.a2() - (st.a2() + d[2] * dt)) <= 1e-12);
  CHECK(std::abs(n.a1p() - std::conj(n.a1())) <= 1e-12);

  // undepleted pump with a2+ = 0: plain decay of a1
  auto u = PhaseState::plusp(p.drive / p.gamma0, std::conj(p.drive) / p.gamma0, {0.5, 0.25}, 0, 0, 0);
  auto un = step_plusp(u, p, zero, dt, Scheme::EulerMaruyama);
  CHECK(std::abs(un.a1() - u.a1() * (1 - dt)) <= 1e-15);

  CHECK_THROWS_AS(step_plusp(PhaseState::wigner(0, 0, 0), p, zero, dt), ContractError);
  CHECK_THROWS_AS(step_plusp(st, p, NoiseBlock{NoiseKind::TruncatedWigner, {}}, dt), ContractError);
}

TEST_CASE("Wigner step examples") {
  PhysicalParams p{0.8, 1, 0.07, {3, 0.5}};
  NoiseBlock zero{NoiseKind::TruncatedWigner, {}};
  auto st = PhaseState::wigner({2, 1}, {0.3, 0.2}, {-0.1, 0.4});
  double dt = 1e-3;
  auto n = step_wigner(st, p, zero, dt, Scheme::EulerMaruyama);
  auto d = classical_drift(p, {st.a0(), st.a1(), st.a2()});
  CHECK(std::abs(n.a0() - (st.a0() + d[0] * dt)) <= 1e-12);
  CHECK(std::abs(n.a1() - (st.a1() + d[1] * dt)) <= 1e-12);
  CHECK(std::abs(n.a2() - (st.a2() + d[2] * dt)) <= 1e-12);

  // deterministic pump build-up, signals stay empty
  auto z = PhaseState::wigner(0, 0, 0);
  for (int i = 0; i < 20000; ++i) z = step_wigner(z, p, zero, dt);
  CHECK(std::abs(z.a0() - p.drive / p.gamma0) < 1e-6);
  CHECK(std::abs(z.a1()) == 0);

  auto bad = PhaseState::wigner(0, 1e200, 1e200);
  CHECK_THROWS_AS(step_wigner(bad, p, zero, 1.0, Scheme::EulerMaruyama), IntegrationFault);
}

TEST_CASE("Wigner vacuum: each mode is an OU process with <|a|^2> = 1/2") {
  PhysicalParams p{1, 1, 0, {0, 0}};
  Moments occ;
  const double dt = 0.01;
  for (int t = 0; t < 40; ++t) {
    NormalStream rng(11, t);
    auto s = PhaseState::wigner(0, 0, 0);
    for (int i = 0; i < 1000; ++i) s = step_wigner(s, p, gen_noise(NoiseKind::TruncatedWigner, rng, dt), dt);
    double acc = 0;
    for (int i = 0; i < 20000; ++i) {
      s = step_wigner(s, p, gen_noise(NoiseKind::TruncatedWigner, rng, dt), dt);
      acc += std::norm(s.a1());
    }
    occ.add(acc / 20000);
  }
  CHECK(std::abs(occ.mean - 0.5) < 3 * occ.se());
}

TEST_CASE("critical step") {
  NoiseBlock zero{NoiseKind::Critical, {}};
  auto v = step_critical({0, 0}, 1.5, zero, 0.01);
  CHECK(v[0] == 0);
  CHECK(v[1] == 0);
  auto w = step_critical({1, 0}, 0.0, zero, 0.1);
  CHECK(w[0] == doctest::Approx(1 - 0.05));
}

TEST_CASE("ensemble determinism and worker independence") {
  auto p = physical_from_scaled(0.005, 1, 0.5);
  IntegratorConfig c;
  c.dt = 0.01;
  c.t_burn = 5;
  c.t_record = 5;
  c.n_traj = 6;
  c.record_interval = 0.05;
  c.store_records = true;
  c.seed = 99;
  EnsembleResult a, b, w1;
  {
    ScopedEnv e("NOPO_THREADS", "4");
    a = run_ensemble(p, Representation::TruncatedWigner, c);
    b = run_ensemble(p, Representation::TruncatedWigner, c);
  }
  {
    ScopedEnv e("NOPO_THREADS", "1");
    w1 = run_ensemble(p, Representation::TruncatedWigner, c);
  }
  CHECK(a.records.size() == 6);
  CHECK(a.records[0].frames.size() == 100);
  CHECK(same_frames(a, b));
  CHECK(same_frames(a, w1));
  c.seed = 100;
  auto d = run_ensemble(p, Representation::TruncatedWigner, c);
  CHECK_FALSE(same_frames(a, d));
}

TEST_CASE("degenerate sizes") {
  auto p = physical_from_scaled(0.005, 1, 0.5);
  IntegratorConfig c;
  c.n_traj = 1;
  c.t_record = 0;
  c.t_burn = 0;
  c.store_records = true;
  auto r = run_ensemble(p, Representation::PositiveP, c);
  CHECK(r.n_faulted == 0);
  CHECK(r.n_completed == 1);
  CHECK(r.records[0].frames.empty());
}

TEST_CASE("config validation") {
  IntegratorConfig c;
  c.dt = 0;
  CHECK_THROWS_AS(validate(c), ParameterError);
  c = {};
  c.record_interval = 0.0025;
  CHECK_THROWS_AS(validate(c), ParameterError);
  c = {};
  c.n_traj = 0;
  CHECK_THROWS_AS(validate(c), ParameterError);
  auto p = physical_from_scaled(0.005, 1, 1.2);
  c = {};
  c.linear_shadow = true;
  CHECK_THROWS_AS(run_ensemble(p, Representation::PositiveP, c), ParameterError);
}

TEST_CASE("default burn-in") {
  ScaledParams s;
  s.gamma_r = 1;
  s.mu = 0.5;
  s.g = 0.07;
  CHECK(default_burn_in(s) == doctest::Approx(100));
  s.gamma_r = 0.01;
  CHECK(default_burn_in(s) == doctest::Approx(5000));
  s.gamma_r = 1;
  s.mu = 1;
  CHECK(default_burn_in(s) == doctest::Approx(50 / 0.07));
}

TEST_CASE("+P vacuum is exact") {
  PhysicalParams p{1, 1, 0.3, {0, 0}};
  IntegratorConfig c;
  c.dt = 0.01;
  c.t_burn = 1;
  c.t_record = 20;
  c.n_traj = 3;
  c.store_records = true;
  auto r = run_ensemble(p, Representation::PositiveP, c);
  for (const auto& rec : r.records)
    for (const auto& f : rec.frames) {
      CHECK(std::abs(f.point.X) == 0);
      CHECK(std::abs(f.point.Y0) == 0);
      CHECK(std::abs(f.mean.Yp) == 0);
    }
}

TEST_CASE("fault budget") {
  PhysicalParams p{1, 1, 0, {0, 0}};
  IntegratorConfig c;
  c.dt = 3.0;  // explicit Euler is unstable beyond dt = 2
  c.record_interval = 3.0;
  c.scheme = Scheme::EulerMaruyama;
  c.t_burn = 0;
  c.t_record = 9000;
  c.n_traj = 4;
  CHECK_THROWS_AS(run_ensemble(p, Representation::TruncatedWigner, c), FaultBudgetExceeded);
  try {
    run_ensemble(p, Representation::TruncatedWigner, c);
  } catch (const FaultBudgetExceeded& e) {
    CHECK(e.n_faulted == 4);
    CHECK(e.n_total == 4);
  }
}

TEST_CASE("step halving with coupled noise") {
  auto p = physical_from_scaled(0.005, 1, 0.5);
  const double dt = 0.004;
  Moments coarse, fine, diff;
  for (int t = 0; t < 12; ++t) {
    NormalStream rng(5, t);
    auto init = classical_steady_state(p);
    auto a = PhaseState::plusp(init.a0, std::conj(init.a0), 0, 0, 0, 0);
    auto b = a;
    double sa = 0, sb = 0;
    const int n = 100000;
    for (int i = 0; i < n + 5000; ++i) {
      auto w1 = gen_noise(NoiseKind::PositiveP, rng, dt / 2);
      auto w2 = gen_noise(NoiseKind::PositiveP, rng, dt / 2);
      b = step_plusp(b, p, w1, dt / 2);
      b = step_plusp(b, p, w2, dt / 2);
      w1 += w2;
      a = step_plusp(a, p, w1, dt);
      if (i >= 5000) {
        auto qa = natural_quadratures(a), qb = natural_quadratures(b);
        sa += (qa.Y * qa.Yp).real();
        sb += (qb.Y * qb.Yp).real();
      }
    }
    coarse.add(sa / n);
    fine.add(sb / n);
    diff.add((sa - sb) / n);
  }
  CAPTURE(coarse.mean);
  CAPTURE(fine.mean);
  CHECK(std::abs(diff.mean) < fine.se());
}

}
