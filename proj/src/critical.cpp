#include "nopo/critical.hpp"

#include <cmath>

#include "nopo/errors.hpp"
#include "nopo/noise.hpp"
#include "nopo/sde.hpp"

namespace nopo {

void validate(const CriticalConfig& c) {
  if (!(c.dt > 0) || !std::isfinite(c.dt)) throw ParameterError("critical.dt must be > 0");
  if (!(c.t_burn >= 0)) throw ParameterError("critical.t_burn must be >= 0");
  if (!(c.t_record > 0)) throw ParameterError("critical.t_record must be > 0");
  if (c.n_traj < 1) throw ParameterError("critical.n_traj must be >= 1");
  if (!(c.sample_interval >= c.dt)) throw ParameterError("critical.sample_interval must be >= dt");
}

CriticalEstimate critical_ensemble(double eta, const CriticalConfig& cfg) {
  validate(cfg);
  if (!std::isfinite(eta)) throw ParameterError("eta must be finite");
  const auto n_burn = static_cast<std::size_t>(std::llround(cfg.t_burn / cfg.dt));
  const auto stride = static_cast<std::size_t>(std::llround(cfg.sample_interval / cfg.dt));
  const auto n_samp = static_cast<std::size_t>(std::llround(cfg.t_record / cfg.sample_interval));
  // start on the classical ring (or the origin below threshold)
  const double r0 = eta > 0 ? std::sqrt(2 * eta) : 0.0;

  struct Part {
    double mean;
    std::size_t n;
  };
  MeanAcc acc;
  std::size_t samples = 0;
  ordered_parallel(
      cfg.n_traj,
      [&](std::size_t i) {
        NormalStream rng(cfg.seed, i);
        std::array<double, 2> v{r0, 0.0};
        for (std::size_t s = 0; s < n_burn; ++s) v = step_critical(v, eta, rng, cfg.dt);
        double sum = 0;
        for (std::size_t k = 0; k < n_samp; ++k) {
          for (std::size_t s = 0; s < stride; ++s) v = step_critical(v, eta, rng, cfg.dt);
          sum += v[0] * v[0] + v[1] * v[1];
        }
        if (!std::isfinite(sum)) throw EstimationError("critical trajectory diverged; reduce dt");
        return Part{n_samp ? sum / static_cast<double>(n_samp) : 0.0, n_samp};
      },
      [&](std::size_t, Part p) {
        acc.add(p.mean);
        samples += p.n;
      });
  CriticalEstimate e;
  e.eta = eta;
  e.xx = acc.get();
  e.trajectories = cfg.n_traj;
  e.samples = samples;
  return e;
}

}  // namespace nopo
