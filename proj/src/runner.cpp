#include <fftw3.h>

#include <algorithm>
#include <boost/version.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "nopo/analytic.hpp"
#include "nopo/epr.hpp"
#include "nopo/harness.hpp"

#ifndef NOPO_VERSION
#define NOPO_VERSION "0.0.0"
#endif

namespace nopo {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, std::string>> meta;  // output-specific lines

  void add(std::vector<double> r) {
    std::vector<std::string> s;
    for (double v : r) s.push_back(fmt(v));
    rows.push_back(std::move(s));
  }
};

bool is_frequency(const std::string& col) { return col == "omega" || col == "omega1" || col == "omega2"; }

const double nan_v = std::nan("");

class Runner {
 public:
  explicit Runner(const ExperimentConfig& c) : cfg(c) {
    phys = resolve_physical(cfg);
    sp = derive_scaled(phys);
    if (cfg.params) {
      // exact values, free of the round trip through physical rates
      sp.gamma_r = cfg.params->gamma_r;
      sp.mu = cfg.params->mu;
      sp.g = std::sqrt(cfg.params->g2);
    }
    g2 = sp.g * sp.g;
    below = sp.mu < 1.0;
  }

  RunSummary run();

 private:
  const ExperimentConfig& cfg;
  PhysicalParams phys;
  ScaledParams sp;
  double g2 = 0.0;
  bool below = true;
  RunSummary summary;
  json resolved;
  std::optional<SpectrumEstimate> spectra;
  std::optional<MomentEstimate> moments;
  std::optional<TripleCorrEstimate> triple;

  bool wants(Output o) const { return std::find(cfg.outputs.begin(), cfg.outputs.end(), o) != cfg.outputs.end(); }

  // Closed forms outside their domain are blank in a simulation run, an error otherwise.
  template <class F>
  double soft(F f) const {
    try {
      return f();
    } catch (const DomainError&) {
      if (cfg.analytic_only) throw;
      return nan_v;
    }
  }

  void simulate();
  std::vector<double> analytic_grid() const;
  Table spectra_table() const;
  Table residual_table() const;
  Table moments_table() const;
  Table triple_table() const;
  Table epr_table() const;
  Table critical_table() const;
  Table sweep_table() const;
  void write(Output o, Table t);
  json manifest(const std::string& status) const;
  void write_manifest(const std::string& status);
};

void Runner::simulate() {
  bool need_spec = wants(Output::Spectra) || wants(Output::NlResidual) || wants(Output::Epr);
  bool need_mom = wants(Output::Moments);
  bool need_tri = wants(Output::Triple);
  if (cfg.analytic_only || !(need_spec || need_mom || need_tri)) return;

  std::optional<SpectrumReducer> sr;
  std::optional<MomentReducer> mr;
  std::optional<TripleReducer> tr;
  std::vector<EnsembleReducer*> rs;
  if (need_spec) rs.push_back(&sr.emplace(cfg.spectral));
  if (need_mom) rs.push_back(&mr.emplace());
  if (need_tri) rs.push_back(&tr.emplace(square_triple_grid(cfg.triple.half, cfg.triple.t_seg)));

  IntegratorConfig ic = cfg.integrator;
  ic.store_records = false;
  try {
    EnsembleResult res = run_ensemble(phys, cfg.rep, ic, rs);
    summary.completed = res.n_completed;
    summary.faulted = res.n_faulted;
    resolved["t_burn"] = res.info.t_burn;
  } catch (const FaultBudgetExceeded& e) {
    summary.faulted = e.n_faulted;
    summary.completed = e.n_total - e.n_faulted;
    write_manifest("fault_budget_exceeded");
    throw;
  }
  if (sr) spectra = sr->result();
  if (mr) moments = mr->result();
  if (tr) triple = tr->result();
}

std::vector<double> Runner::analytic_grid() const {
  std::vector<double> w;
  const double dw = 2 * std::numbers::pi / cfg.spectral.t_seg;
  for (std::size_t k = 0; k * dw <= cfg.spectral.omega_max * (1 + 1e-12); ++k) w.push_back(k * dw);
  return w;
}

Table Runner::spectra_table() const {
  Table t;
  auto lin = [&](double w) { return linear_spectra(sp.mu, w); };
  auto pp = [&](double w) { return spectrum_plusp(sp.mu, sp.gamma_r, g2, w); };
  auto v0_an = [&](double w) { return cfg.rep == Representation::PositiveP ? soft([&] { return pp(w).v0; }) : nan_v; };
  auto vp_an = [&](double w) {
    return soft([&] {
      return cfg.rep == Representation::PositiveP ? pp(w).vpi2 : spectrum_wigner(sp.mu, sp.gamma_r, g2, w);
    });
  };
  if (!spectra) {
    t.columns = {"omega", "V0_linear", "Vpi2_linear", "V0_analytic", "Vpi2_analytic"};
    for (double w : analytic_grid()) t.add({w, lin(w).v0, lin(w).vpi2, v0_an(w), vp_an(w)});
    return t;
  }
  const SpectrumEstimate& e = *spectra;
  t.columns = {"omega", "V0", "V0_se", "Vpi2", "Vpi2_se", "V0_linear", "Vpi2_linear", "V0_analytic", "Vpi2_analytic"};
  for (double th : e.thetas) {
    t.columns.push_back("Vtheta_" + fmt(th));
    t.columns.push_back("Vtheta_" + fmt(th) + "_se");
  }
  auto l0 = band_average(e, [&](double w) { return lin(w).v0; });
  auto l1 = band_average(e, [&](double w) { return lin(w).vpi2; });
  auto a0 = band_average(e, v0_an);
  auto a1 = band_average(e, vp_an);
  for (std::size_t i = 0; i < e.omega.size(); ++i) {
    std::vector<double> r{e.omega[i], e.v0[i], e.v0_se[i], e.vpi2[i], e.vpi2_se[i], l0[i], l1[i], a0[i], a1[i]};
    for (std::size_t k = 0; k < e.thetas.size(); ++k) {
      r.push_back(e.vtheta[k][i]);
      r.push_back(e.vtheta_se[k][i]);
    }
    t.add(r);
  }
  t.meta = {{"segments_per_trajectory", std::to_string(e.segments)},
            {"band", std::to_string(e.band)},
            {"max_imag", fmt(e.max_imag)}};
  return t;
}

Table Runner::residual_table() const {
  auto nl = [&](double w) {
    return soft([&] {
      double full = cfg.rep == Representation::PositiveP ? spectrum_plusp(sp.mu, sp.gamma_r, g2, w).vpi2
                                                         : spectrum_wigner(sp.mu, sp.gamma_r, g2, w);
      return full - linear_spectra(sp.mu, w).vpi2;
    });
  };
  Table t;
  if (!spectra) {
    t.columns = {"omega", "V_nl_analytic"};
    for (double w : analytic_grid()) t.add({w, nl(w)});
    return t;
  }
  const SpectrumEstimate& e = *spectra;
  Residual sub = nonlinear_residual(e, sp.mu);
  Residual sim = e.has_differenced ? differenced_residual(e) : sub;
  auto an = band_average(e, nl);
  t.columns = {"omega", "V_nl_sim", "V_nl_sim_se", "V_nl_analytic", "V_nl_sub", "V_nl_sub_se"};
  for (std::size_t i = 0; i < e.omega.size(); ++i)
    t.add({e.omega[i], sim.value[i], sim.se[i], an[i], sub.value[i], sub.se[i]});
  t.meta = {{"nl_method", e.has_differenced ? "differenced" : "subtracted"}};
  return t;
}

Table Runner::moments_table() const {
  const bool pp = cfg.rep == Representation::PositiveP;
  struct Row {
    const char* name;
    double analytic;
    Estimate sim;
  };
  double x0_2 = nan_v, xx = nan_v, yy = nan_v, tri = nan_v;
  if (below || cfg.analytic_only) {
    if (pp) {
      auto m = moments_plusp(sp.mu, sp.gamma_r);
      x0_2 = m.x0_2, xx = m.xx1, yy = m.yy1, tri = m.triple;
    } else {
      auto m = moments_wigner(sp.mu, sp.gamma_r);
      x0_2 = m.x0_2, xx = m.xx1, yy = m.yy1;
    }
  }
  const double total = soft([&] { return total_squeeze_moment(sp.mu, sp.gamma_r, g2, cfg.rep); });
  MomentEstimate m = moments.value_or(MomentEstimate{});
  auto s = [&](Estimate e) { return moments ? e : Estimate{nan_v, nan_v}; };
  std::vector<Row> rows = {{"x0", 2 * sp.mu + g2 * x0_2, s(m.x0)},
                           {"x0_2", x0_2, s(m.x0_2)},
                           {"xx", xx, s(m.xx)},
                           {"yy", yy, s(m.yy)},
                           {"total", total, s(m.total)},
                           {"triple", tri, s(m.triple)},
                           {"xx_scaled", g2 * xx, s(m.xx_scaled)}};
  Table t;
  t.columns = {"quantity", "value", "se", "analytic"};
  for (const auto& r : rows) t.rows.push_back({r.name, fmt(r.sim.value), fmt(r.sim.se), fmt(r.analytic)});
  if (moments) t.meta = {{"samples", std::to_string(m.samples)}};
  return t;
}

Table Runner::triple_table() const {
  auto an = [&](double o1, double o2) {
    try {
      if (cfg.rep == Representation::PositiveP) return g2 * g2 * triple_plusp(sp.mu, sp.gamma_r, o1, o2);
      return triple_wigner(sp.mu, sp.gamma_r, o1, o2, sp.g);
    } catch (const DomainError&) {
      if (cfg.analytic_only) throw;
      return cplx(nan_v, nan_v);
    }
  };
  Table t;
  if (!triple) {
    t.columns = {"omega1", "omega2", "analytic_re", "analytic_im"};
    TripleGrid g = square_triple_grid(cfg.triple.half, cfg.triple.t_seg);
    const double dw = 2 * std::numbers::pi / g.t_seg;
    for (auto [k1, k2] : g.bins) {
      cplx a = an(k1 * dw, k2 * dw);
      t.add({k1 * dw, k2 * dw, a.real(), a.imag()});
    }
    return t;
  }
  const auto& e = *triple;
  t.columns = {"omega1", "omega2", "re", "im", "se_re", "se_im", "se", "analytic_re", "analytic_im"};
  for (std::size_t i = 0; i < e.value.size(); ++i) {
    cplx a = an(e.omega1[i], e.omega2[i]);
    t.add({e.omega1[i], e.omega2[i], e.value[i].real(), e.value[i].imag(), e.se_re[i], e.se_im[i], e.se[i],
           a.real(), a.imag()});
  }
  t.meta = {{"segments_per_trajectory", std::to_string(e.segments)}};
  return t;
}

Table Runner::epr_table() const {
  EprReport r = spectra ? epr_report(*spectra) : epr_report_analytic(sp.mu, sp.gamma_r, g2, analytic_grid());
  Table t;
  t.columns = {"omega",       "V0",          "V0_se", "Vpi2", "Vpi2_se", "inference", "inference_se", "epr_product",
               "heisenberg", "cx",          "cy",    "epr_demonstrated", "entangled_duan_simon"};
  for (const auto& b : r.bins)
    t.add({b.omega, b.v0, b.v0_se, b.vpi2, b.vpi2_se, b.inference, b.inference_se, b.epr_product, b.heisenberg,
           b.gains.cx, b.gains.cy, b.epr_demonstrated ? 1.0 : 0.0, b.entangled_duan_simon ? 1.0 : 0.0});
  return t;
}

Table Runner::critical_table() const {
  Table t;
  t.columns = {"eta", "xx_quadrature", "squeeze_moment"};
  if (!cfg.analytic_only) {
    t.columns.push_back("xx_sim");
    t.columns.push_back("xx_sim_se");
  }
  CriticalConfig cc = cfg.critical.sim;
  cc.seed = cfg.integrator.seed;
  for (double eta : cfg.critical.eta) {
    std::vector<double> r{eta, critical_xx(eta), critical_squeeze_moment(eta, sp.gamma_r, sp.g)};
    if (!cfg.analytic_only) {
      CriticalEstimate e = critical_ensemble(eta, cc);
      r.push_back(e.xx.value);
      r.push_back(e.xx.se);
    }
    t.add(r);
  }
  return t;
}

Table Runner::sweep_table() const {
  const SweepSettings& s = *cfg.sweep;
  std::vector<double> rates = s.gamma_r.empty() ? std::vector<double>{sp.gamma_r} : s.gamma_r;
  std::vector<double> mus;
  for (std::size_t i = 0; i < s.mu_points; ++i)
    mus.push_back(s.mu_points == 1 ? s.mu_start
                                   : s.mu_start + (s.mu_stop - s.mu_start) * static_cast<double>(i) /
                                                      static_cast<double>(s.mu_points - 1));
  Table t;
  const std::string& k = s.kind;
  if (k == "total_moment") t.columns = {"mu", "gamma_r", "total_plusp", "total_wigner", "linear"};
  if (k == "nl_moment") t.columns = {"mu", "gamma_r", "nl_plusp", "nl_wigner"};
  if (k == "opt_squeeze") t.columns = {"mu", "gamma_r", "vpi2", "vpi2_linear"};
  if (k == "unsqueeze") t.columns = {"mu", "gamma_r", "v0", "v0_linear"};
  if (k == "heisenberg") t.columns = {"mu", "gamma_r", "product", "product_linear"};
  if (k == "inference") t.columns = {"mu", "gamma_r", "inference", "epr_product", "epr"};
  for (double gr : rates)
    for (double mu : mus) {
      auto lin = linear_spectra(mu, s.omega);
      if (k == "total_moment") {
        t.add({mu, gr, total_squeeze_moment(mu, gr, g2, Representation::PositiveP),
               total_squeeze_moment(mu, gr, g2, Representation::TruncatedWigner), 1 / (1 + mu)});
      } else if (k == "nl_moment") {
        t.add({mu, gr, nl_squeeze_moment(mu, gr, g2, Representation::PositiveP),
               nl_squeeze_moment(mu, gr, g2, Representation::TruncatedWigner)});
      } else {
        auto v = spectrum_plusp(mu, gr, g2, s.omega);
        if (k == "opt_squeeze") t.add({mu, gr, v.vpi2, lin.vpi2});
        if (k == "unsqueeze") t.add({mu, gr, v.v0, lin.v0});
        if (k == "heisenberg") t.add({mu, gr, v.v0 * v.vpi2, lin.v0 * lin.vpi2});
        if (k == "inference") {
          // perturbative V0 turns negative very close to threshold
          double inf = v.v0 > 0 ? inference_variance(v.v0, v.vpi2) : nan_v;
          t.add({mu, gr, inf, inf * inf, std::isnan(inf) ? nan_v : (epr_flag(inf, inf) ? 1.0 : 0.0)});
        }
      }
    }
  t.meta = {{"sweep", k}, {"omega", fmt(s.omega)}};
  return t;
}

void Runner::write(Output o, Table t) {
  const std::string name = to_string(o);
  fs::path path = fs::path(cfg.out_dir) / (name + ".csv");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const double unit = cfg.physical_units ? phys.gamma : 1.0;
  out << "# schema: nopo-csv/" << kSchemaVersion << "\n";
  out << "# output: " << name << "\n";
  out << "# experiment: " << cfg.name << "\n";
  if (!cfg.figure.empty()) out << "# figure: " << cfg.figure << "\n";
  out << "# representation: " << to_string(cfg.rep) << "\n";
  out << "# mode: " << (cfg.analytic_only ? "analytic" : "simulation") << "\n";
  out << "# seed: " << cfg.integrator.seed << "\n";
  out << "# g2: " << fmt(g2) << "\n";
  out << "# gamma_r: " << fmt(sp.gamma_r) << "\n";
  out << "# mu: " << fmt(sp.mu) << "\n";
  out << "# frequency_units: " << (cfg.physical_units ? "physical, omega * gamma, gamma = " + fmt(unit) : "scaled")
      << "\n";
  if (!cfg.analytic_only && o != Output::Sweep && o != Output::Critical)
    out << "# trajectories: " << summary.completed << " completed, " << summary.faulted << " faulted\n";
  for (const auto& [k, v] : t.meta) out << "# " << k << ": " << v << "\n";

  std::vector<bool> freq;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    out << (i ? "," : "") << t.columns[i];
    freq.push_back(cfg.physical_units && is_frequency(t.columns[i]));
  }
  out << "\n";
  for (auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (freq[i]) r[i] = fmt(std::stod(r[i]) * unit);
      out << (i ? "," : "") << r[i];
    }
    out << "\n";
  }
  summary.files.push_back(path);
}

json Runner::manifest(const std::string& status) const {
  json m;
  m["manifest_version"] = kSchemaVersion;
  m["status"] = status;
  m["seed"] = cfg.integrator.seed;
  m["versions"] = {{"nopo", NOPO_VERSION},
                   {"fftw", std::string(fftw_version)},
                   {"boost", BOOST_LIB_VERSION},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                   {"compiler", __VERSION__}};
  m["config"] = config_to_json(cfg);
  json r = resolved;
  r["g2"] = g2;
  r["g"] = sp.g;
  r["gamma_r"] = sp.gamma_r;
  r["mu"] = sp.mu;
  r["physical"] = {{"gamma0", phys.gamma0},
                   {"gamma", phys.gamma},
                   {"chi", phys.chi},
                   {"drive", {phys.drive.real(), phys.drive.imag()}}};
  m["resolved"] = r;
  m["faults"] = {{"completed", summary.completed},
                 {"faulted", summary.faulted},
                 {"budget_exceeded", status == "fault_budget_exceeded"}};
  json files = json::array();
  for (const auto& f : summary.files) files.push_back(f.filename().string());
  m["files"] = files;
  return m;
}

void Runner::write_manifest(const std::string& status) {
  summary.manifest = fs::path(cfg.out_dir) / "manifest.json";
  std::ofstream out(summary.manifest);
  if (!out) throw std::runtime_error("cannot write " + summary.manifest.string());
  out << manifest(status).dump(2) << "\n";
}

RunSummary Runner::run() {
  fs::create_directories(cfg.out_dir);
  resolved["t_burn"] = cfg.integrator.t_burn ? *cfg.integrator.t_burn : default_burn_in(sp);
  simulate();
  for (Output o : cfg.outputs) {
    switch (o) {
      case Output::Spectra: write(o, spectra_table()); break;
      case Output::NlResidual: write(o, residual_table()); break;
      case Output::Moments: write(o, moments_table()); break;
      case Output::Triple: write(o, triple_table()); break;
      case Output::Epr: write(o, epr_table()); break;
      case Output::Critical: write(o, critical_table()); break;
      case Output::Sweep: write(o, sweep_table()); break;
    }
  }
  write_manifest("ok");
  return summary;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  Runner r(cfg);
  return r.run();
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const FaultBudgetExceeded*>(&e)) return 3;
  if (dynamic_cast<const ParameterError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 2;
  return 1;
}

}  // namespace nopo
