#include "nopo/ensemble.hpp"

#include <cmath>
#include <cstdlib>

#include "nopo/errors.hpp"

namespace nopo {

void validate(const IntegratorConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ParameterError("integrator.dt must be > 0");
  if (!(cfg.t_record >= 0.0)) throw ParameterError("integrator.t_record must be >= 0");
  if (cfg.n_traj < 1) throw ParameterError("integrator.n_traj must be >= 1");
  if (cfg.t_burn && !(*cfg.t_burn >= 0.0)) throw ParameterError("integrator.t_burn must be >= 0");
  if (!(cfg.record_interval >= cfg.dt)) throw ParameterError("integrator.record_interval must be >= dt");
  double ratio = cfg.record_interval / cfg.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio)
    throw ParameterError("integrator.record_interval must be a multiple of dt");
}

double default_burn_in(const ScaledParams& sp) {
  double slow = std::max(std::abs(1.0 - sp.mu), sp.g);
  slow = std::min({slow, sp.gamma_r, 1.0});
  if (!(slow > 0.0)) slow = 1.0;
  return 50.0 / slow;
}

std::size_t worker_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NOPO_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(v));
  }
  return n;
}

namespace {

struct Plan {
  RateModel model;
  Representation rep;
  IntegratorConfig cfg;
  ClassicalState init;
  std::size_t burn_steps = 0;
  std::size_t n_records = 0;
  std::size_t steps_per_record = 1;
  double record_interval = 0.0;
  bool noise = false;
  bool shadow = false;
};

struct Outcome {
  bool faulted = false;
  std::vector<std::unique_ptr<FrameConsumer>> consumers;
  TrajectoryRecord record;
};

PhaseState to_state(Representation rep, const std::array<cplx, 6>& a) { return {rep, a}; }
PhaseState to_state(Representation, const std::array<cplx, 3>& a) { return PhaseState::wigner(a[0], a[1], a[2]); }

PhaseState shadow_state(const Plan& pl, const std::array<cplx, 4>& b) {
  cplx a0 = pl.model.eps / pl.model.gamma_r;
  return PhaseState::plusp(a0, std::conj(a0), b[0], b[1], b[2], b[3]);
}
PhaseState shadow_state(const Plan& pl, const std::array<cplx, 3>& b) {
  cplx a0 = pl.model.eps / pl.model.gamma_r;
  return PhaseState::wigner(a0 + b[0], b[1], b[2]);
}

template <std::size_t N>
bool all_finite(const std::array<cplx, N>& a) {
  for (const auto& z : a)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

template <class K, class SK>
void integrate(const Plan& pl, std::size_t idx, Outcome& out) {
  K k(pl.model);
  SK sk(pl.model);
  NoiseKind nk = noise_kind(pl.rep);
  NormalStream rng(pl.cfg.seed, idx);
  const double dt = pl.cfg.dt;
  const Scheme sch = pl.cfg.scheme;

  std::array<cplx, K::N> a{};
  if constexpr (K::N == 6) {
    a = {pl.init.a0, std::conj(pl.init.a0), pl.init.a1, std::conj(pl.init.a1), pl.init.a2, std::conj(pl.init.a2)};
  } else {
    a = {pl.init.a0, pl.init.a1, pl.init.a2};
  }
  std::array<cplx, SK::N> b{};
  const int sig = pl.rep == Representation::PositiveP ? 0 : 1;

  for (std::size_t i = 0; i < pl.burn_steps; ++i) {
    NoiseBlock w = gen_noise(nk, rng, dt);
    detail::advance(k, a, w, dt, sch);
    if (pl.shadow) detail::advance(sk, b, w, dt, sch);
  }
  if (!all_finite(a) || !all_finite(b)) {
    out.faulted = true;
    return;
  }

  const std::size_t m = pl.steps_per_record;
  const double inv_m = 1.0 / static_cast<double>(m);
  RecordFrame fr;
  for (std::size_t r = 0; r < pl.n_records; ++r) {
    std::array<cplx, K::N> sum;
    std::array<cplx, SK::N> ssum;
    for (std::size_t i = 0; i < K::N; ++i) sum[i] = 0.5 * a[i];
    for (std::size_t i = 0; i < SK::N; ++i) ssum[i] = 0.5 * b[i];
    cplx n1 = 0.0, n2 = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      NoiseBlock w = gen_noise(nk, rng, dt);
      detail::advance(k, a, w, dt, sch);
      n1 += w.dw[sig];
      n2 += w.dw[sig + 1];
      const double h = j + 1 < m ? 1.0 : 0.5;
      for (std::size_t i = 0; i < K::N; ++i) sum[i] += h * a[i];
      if (pl.shadow) {
        detail::advance(sk, b, w, dt, sch);
        for (std::size_t i = 0; i < SK::N; ++i) ssum[i] += h * b[i];
      }
    }
    if (!all_finite(a) || !all_finite(b)) {
      out.faulted = true;
      return;
    }
    for (auto& z : sum) z *= inv_m;
    for (auto& z : ssum) z *= inv_m;
    fr.time = static_cast<double>(r + 1) * pl.record_interval;
    fr.point = natural_quadratures(to_state(pl.rep, a));
    fr.mean = natural_quadratures(to_state(pl.rep, sum));
    if (pl.noise) fr.noise = {n1, n2};
    if (pl.shadow) fr.shadow_mean = natural_quadratures(shadow_state(pl, ssum));
    for (auto& c : out.consumers) c->on_frame(fr);
    if (pl.cfg.store_records) out.record.frames.push_back(fr);
  }
}

}  // namespace

EnsembleResult run_ensemble(const PhysicalParams& p, Representation rep, const IntegratorConfig& cfg,
                            std::span<EnsembleReducer* const> reducers) {
  validate(cfg);
  ScaledParams sp = derive_scaled(p);

  Plan pl;
  pl.model = rate_model(p);
  pl.rep = rep;
  pl.cfg = cfg;
  pl.init = classical_steady_state(p);
  double t_burn = cfg.t_burn ? *cfg.t_burn : default_burn_in(sp);
  pl.burn_steps = static_cast<std::size_t>(std::llround(t_burn / cfg.dt));
  pl.steps_per_record = static_cast<std::size_t>(std::llround(cfg.record_interval / cfg.dt));
  pl.record_interval = pl.steps_per_record * cfg.dt;
  pl.n_records = static_cast<std::size_t>(std::floor(cfg.t_record / pl.record_interval + 1e-9));
  pl.noise = rep == Representation::TruncatedWigner || cfg.record_noise;
  pl.shadow = cfg.linear_shadow;
  if (pl.shadow && sp.mu >= 1.0) throw ParameterError("linear shadow needs mu < 1");

  EnsembleResult res;
  res.info = {p, sp, rep, cfg, t_burn, pl.record_interval, pl.noise, pl.shadow};
  for (auto* r : reducers) r->begin(res.info);

  auto work = [&](std::size_t idx) {
    Outcome out;
    out.record.index = idx;
    for (auto* r : reducers) out.consumers.push_back(r->start(idx));
    if (rep == Representation::PositiveP)
      integrate<detail::PlusPKernel, detail::PlusPShadowKernel>(pl, idx, out);
    else
      integrate<detail::WignerKernel, detail::WignerShadowKernel>(pl, idx, out);
    out.record.faulted = out.faulted;
    if (out.faulted) out.record.frames.clear();
    return out;
  };
  auto merge = [&](std::size_t idx, Outcome&& out) {
    for (std::size_t i = 0; i < reducers.size(); ++i)
      reducers[i]->finish(idx, std::move(out.consumers[i]), out.faulted);
    if (out.faulted)
      ++res.n_faulted;
    else
      ++res.n_completed;
    if (cfg.store_records) res.records.push_back(std::move(out.record));
  };
  ordered_parallel(cfg.n_traj, work, merge);

  if (res.n_faulted * 100 > cfg.n_traj) throw FaultBudgetExceeded(res.n_faulted, cfg.n_traj);
  return res;
}

void replay(const EnsembleResult& ens, std::span<EnsembleReducer* const> reducers) {
  if (!ens.info.config.store_records) throw ContractError("ensemble was run without stored records");
  for (auto* r : reducers) r->begin(ens.info);
  for (const auto& rec : ens.records) {
    std::vector<std::unique_ptr<FrameConsumer>> cs;
    for (auto* r : reducers) cs.push_back(r->start(rec.index));
    if (!rec.faulted)
      for (const auto& f : rec.frames)
        for (auto& c : cs) c->on_frame(f);
    for (std::size_t i = 0; i < reducers.size(); ++i) reducers[i]->finish(rec.index, std::move(cs[i]), rec.faulted);
  }
}

}  // namespace nopo
