#include <cstdio>
#include <sstream>

#include "nopo/harness.hpp"

namespace nopo {
namespace {

const std::vector<double> kFiveRates = {1e-3, 1e-2, 1e-1, 1.0, 10.0};

ExperimentConfig sweep_preset(const std::string& name, const std::string& fig, double gamma_r,
                              std::vector<double> rates, const std::string& kind) {
  ExperimentConfig c;
  c.name = name;
  c.figure = fig;
  c.params = ScaledTriple{0.001, gamma_r, 0.5, 1.0};
  c.analytic_only = true;
  c.outputs = {Output::Sweep};
  SweepSettings s;
  s.kind = kind;
  s.mu_start = 0.0;
  s.mu_stop = 0.995;
  s.mu_points = 200;
  s.gamma_r = std::move(rates);
  c.sweep = s;
  c.out_dir = name;
  return c;
}

// Simulation protocol: dtau = 0.001, tau_max = 10000, 2000 trajectories.
ExperimentConfig spectrum_preset(const std::string& name, const std::string& fig, double g2, double gamma_r,
                                 double mu, double t_seg) {
  ExperimentConfig c;
  c.name = name;
  c.figure = fig;
  c.params = ScaledTriple{g2, gamma_r, mu, 1.0};
  c.integrator.dt = 1e-3;
  c.integrator.t_record = 1e4;
  c.integrator.n_traj = 2000;
  c.integrator.scheme = Scheme::EulerMaruyama;
  c.integrator.linear_shadow = true;
  c.spectral.t_seg = t_seg;
  c.spectral.omega_max = 10.0;
  c.outputs = {Output::NlResidual, Output::Spectra};
  c.out_dir = name;
  return c;
}

std::vector<Preset> build() {
  std::vector<Preset> v;
  v.push_back({"fig_totalmoment", "Fig. 1", "total squeezed-quadrature moment vs mu",
               sweep_preset("fig_totalmoment", "Fig. 1", 0.5, {0.5}, "total_moment")});
  v.push_back({"fig_nlmoment", "Fig. 2", "order g^2 part of the squeezed moment, +P and Wigner, vs mu",
               sweep_preset("fig_nlmoment", "Fig. 2", 1.0, {0.1, 1.0, 10.0}, "nl_moment")});
  v.push_back({"fig_optsqueeze", "Fig. 3", "zero-frequency Vpi/2 vs mu",
               sweep_preset("fig_optsqueeze", "Fig. 3", 1.0, kFiveRates, "opt_squeeze")});
  v.push_back({"fig_unsqueeze", "Fig. 4", "zero-frequency V0 vs mu",
               sweep_preset("fig_unsqueeze", "Fig. 4", 1.0, kFiveRates, "unsqueeze")});
  v.push_back({"fig_heisenberg", "Fig. 5", "zero-frequency V0 Vpi/2 vs mu",
               sweep_preset("fig_heisenberg", "Fig. 5", 1.0, kFiveRates, "heisenberg")});
  v.push_back({"fig_inference", "Fig. 6", "zero-frequency inference variance vs mu",
               sweep_preset("fig_inference", "Fig. 6", 1.0, kFiveRates, "inference")});
  v.push_back({"fig_mu05", "Fig. 7", "nonlinear squeezing spectrum, simulation vs analytic",
               spectrum_preset("fig_mu05", "Fig. 7", 0.005, 1.0, 0.5, 100.0)});
  v.push_back({"fig_mu09", "Fig. 8", "nonlinear squeezing spectrum, simulation vs analytic",
               spectrum_preset("fig_mu09", "Fig. 8", 0.001, 0.5, 0.9, 200.0)});
  {
    Preset p{"fig_mu093", "Fig. 9", "nonlinear squeezing spectrum at the optimum drive, with EPR criteria",
             spectrum_preset("fig_mu093", "Fig. 9", 0.001, 0.01, 0.93, 1000.0)};
    p.config.outputs.push_back(Output::Epr);
    v.push_back(std::move(p));
  }
  {
    ExperimentConfig c;
    c.name = "crit_xx";
    c.params = ScaledTriple{1e-4, 1.0, 1.0, 1.0};
    c.outputs = {Output::Critical};
    for (int i = -8; i <= 8; ++i) c.critical.eta.push_back(0.5 * i);
    c.out_dir = "crit_xx";
    v.push_back({"crit_xx", "", "reduced critical SDE <x+^2 + x-^2> vs the quadrature oracle over an eta grid", c});
  }
  return v;
}

}  // namespace

const std::vector<Preset>& preset_catalog() {
  static const std::vector<Preset> c = build();
  return c;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : preset_catalog())
    if (p.name == name) return p;
  throw ConfigError("unknown preset '" + name + "' (see list-presets)");
}

std::string describe(const Preset& p) {
  std::ostringstream os;
  const auto& c = p.config;
  os << p.name << "\t" << (p.figure.empty() ? "-" : p.figure) << "\t";
  const auto& s = *c.params;
  char buf[160];
  if (c.sweep) {
    std::snprintf(buf, sizeof buf, "g2=%g gamma_r=", s.g2);
    os << buf;
    for (std::size_t i = 0; i < c.sweep->gamma_r.size(); ++i) os << (i ? "," : "") << c.sweep->gamma_r[i];
  } else if (c.critical.eta.empty() || c.outputs.front() != Output::Critical) {
    std::snprintf(buf, sizeof buf, "g2=%g gamma_r=%g mu=%g", s.g2, s.gamma_r, s.mu);
    os << buf;
  } else {
    std::snprintf(buf, sizeof buf, "eta=%g..%g (%zu points)", c.critical.eta.front(), c.critical.eta.back(),
                  c.critical.eta.size());
    os << buf;
  }
  os << "\t" << p.summary;
  return os.str();
}

}  // namespace nopo
