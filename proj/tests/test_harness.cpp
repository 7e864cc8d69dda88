#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "nopo/harness.hpp"

using namespace nopo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("nopo_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string header_row(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') return line;
  return "";
}

int cli(const std::string& args) {
  std::string cmd = std::string(NOPO_CLI) + " " + args + " >/dev/null 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "t.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

ExperimentConfig small_run(const fs::path& out) {
  ExperimentConfig c = find_preset("fig_mu05").config;
  c.integrator.dt = 0.01;
  c.integrator.t_burn = 10.0;
  c.integrator.t_record = 100.0;
  c.integrator.n_traj = 4;
  c.spectral.t_seg = 20.0;
  c.spectral.omega_max = 5.0;
  c.outputs = {Output::NlResidual, Output::Spectra, Output::Moments, Output::Triple, Output::Epr};
  c.triple = {2, 20.0};
  c.out_dir = out.string();
  return c;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("catalog entries carry figure and caption parameters") {
  const auto& cat = preset_catalog();
  std::vector<std::string> names;
  for (const auto& p : cat) names.push_back(p.name);
  CHECK(names == std::vector<std::string>{"fig_totalmoment", "fig_nlmoment", "fig_optsqueeze", "fig_unsqueeze",
                                          "fig_heisenberg", "fig_inference", "fig_mu05", "fig_mu09", "fig_mu093",
                                          "crit_xx"});
  const auto& tm = find_preset("fig_totalmoment");
  CHECK(tm.figure == "Fig. 1");
  CHECK(tm.config.params->g2 == 0.001);
  CHECK(tm.config.sweep->gamma_r == std::vector<double>{0.5});
  const auto& opt = find_preset("fig_optsqueeze");
  CHECK(opt.config.sweep->gamma_r == std::vector<double>{1e-3, 1e-2, 1e-1, 1.0, 10.0});
  CHECK(opt.config.params->g2 == 0.001);
  const auto& m05 = find_preset("fig_mu05").config;
  CHECK(m05.params->g2 == 0.005);
  CHECK(m05.params->gamma_r == 1.0);
  CHECK(m05.params->mu == 0.5);
  CHECK(m05.integrator.dt == 1e-3);
  CHECK(m05.integrator.t_record == 1e4);
  CHECK(m05.integrator.n_traj == 2000);
  const auto& m093 = find_preset("fig_mu093").config;
  CHECK(m093.params->g2 == 0.001);
  CHECK(m093.params->gamma_r == 0.01);
  CHECK(m093.params->mu == 0.93);
  CHECK(find_preset("crit_xx").config.critical.eta.size() > 5);
  for (const auto& p : cat) {
    if (p.name != "crit_xx") CHECK(p.figure.rfind("Fig. ", 0) == 0);
    CHECK_NOTHROW(validate(p.config));
    CHECK(describe(p).find(p.name) == 0);
  }
  CHECK_THROWS_AS(find_preset("nope"), ConfigError);
}

TEST_CASE("config diagnostics name the line and field") {
  std::string e = error_of("{\n \"params\": {\"g2\": 0.001, \"gamma_r\": 1, \"mu\": 0.5},\n \"integrator\": {\n  \"dt\": -1\n },\n"
                           " \"outputs\": [\"spectra\"]\n}");
  CHECK(e.find("t.json:4:") == 0);
  CHECK(e.find("/integrator/dt") != std::string::npos);

  e = error_of("{\n \"params\": {\"g2\": 0.001, \"mu\": 0.5},\n \"outputs\": [\"spectra\",\n  \"bogus\"]\n}");
  CHECK(e.find("t.json:4:") == 0);
  CHECK(e.find("/outputs/1") != std::string::npos);

  e = error_of("{\n \"params\": {\"g2\": 0.001},\n \"spectral\": {\"tseg\": 3},\n \"outputs\": [\"spectra\"]\n}");
  CHECK(e.find("t.json:3:") == 0);
  CHECK(e.find("unknown field") != std::string::npos);

  e = error_of("{\"outputs\": [\"spectra\"]}");
  CHECK(e.find("exactly one of") != std::string::npos);
  e = error_of("{\"params\": {}, \"physical\": {\"chi\": 0.1}, \"outputs\": [\"spectra\"]}");
  CHECK(e.find("exactly one of") != std::string::npos);

  e = error_of("{\n \"params\": {\"g2\": 0.001,,}\n}");
  CHECK(e.find("line 2") != std::string::npos);

  e = error_of("{\"params\": {\"g2\": 0.001}, \"integrator\": {\"n_traj\": 2.5}, \"outputs\": [\"moments\"]}");
  CHECK(e.find("/integrator/n_traj") != std::string::npos);
  e = error_of("{\"params\": {\"g2\": 0.001}, \"outputs\": [\"sweep\"]}");
  CHECK(e.find("/sweep") != std::string::npos);
  e = error_of("{\"params\": {\"g2\": 0.001}, \"outputs\": [\"critical\"]}");
  CHECK(e.find("/critical/eta") != std::string::npos);
}

TEST_CASE("config json round trip") {
  for (const auto& p : preset_catalog()) {
    auto j = config_to_json(p.config);
    auto c = parse_config(j.dump(), p.name);
    CHECK(config_to_json(c) == j);
  }
  auto c = parse_config(R"({"physical": {"gamma0": 0.5, "chi": 0.03, "drive": [0.4, 0.1]},
                            "representation": "wigner", "outputs": ["spectra"], "seed": 9})");
  CHECK(c.physical->drive == cplx(0.4, 0.1));
  CHECK(c.rep == Representation::TruncatedWigner);
  CHECK(c.integrator.seed == 9);
  CHECK(!c.params);
}

TEST_CASE("manifest re-fed as config reproduces identical CSVs") {
  fs::path a = scratch("rt_a"), b = scratch("rt_b");
  RunSummary s = run_experiment(small_run(a));
  REQUIRE(s.files.size() == 5);
  CHECK(s.completed == 4);
  ExperimentConfig again = load_config(s.manifest);
  again.out_dir = b.string();
  RunSummary t = run_experiment(again);
  REQUIRE(t.files.size() == s.files.size());
  for (std::size_t i = 0; i < s.files.size(); ++i) {
    CHECK(s.files[i].filename() == t.files[i].filename());
    CHECK(slurp(s.files[i]) == slurp(t.files[i]));
  }
  CHECK(header_row(a / "nl_residual.csv").rfind("omega,V_nl_sim,V_nl_sim_se,V_nl_analytic", 0) == 0);
  auto m = nlohmann::json::parse(slurp(s.manifest));
  CHECK(m["seed"] == 1);
  CHECK(m["faults"]["faulted"] == 0);
  CHECK(m["versions"].contains("fftw"));
  CHECK(slurp(a / "spectra.csv").find("# seed: 1") != std::string::npos);
}

TEST_CASE("seed changes the simulated columns only") {
  fs::path a = scratch("seed_a"), b = scratch("seed_b");
  ExperimentConfig c = small_run(a);
  c.outputs = {Output::Moments};
  run_experiment(c);
  c.integrator.seed = 2;
  c.out_dir = b.string();
  run_experiment(c);
  CHECK(slurp(a / "moments.csv") != slurp(b / "moments.csv"));
}

TEST_CASE("analytic-only run at threshold is a domain error") {
  fs::path d = scratch("mu1");
  ExperimentConfig c;
  c.params = ScaledTriple{0.001, 1.0, 1.0, 1.0};
  c.outputs = {Output::Spectra};
  c.analytic_only = true;
  c.out_dir = d.string();
  try {
    run_experiment(c);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(exit_code(e) == 2);
  }
}

TEST_CASE("physical units rescale frequency columns") {
  fs::path a = scratch("pu_a"), b = scratch("pu_b");
  ExperimentConfig c;
  c.params = ScaledTriple{0.001, 1.0, 0.5, 2.0};
  c.outputs = {Output::NlResidual};
  c.analytic_only = true;
  c.spectral.t_seg = 10.0;
  c.out_dir = a.string();
  run_experiment(c);
  c.physical_units = true;
  c.out_dir = b.string();
  run_experiment(c);
  auto rows = [](const fs::path& p) {
    std::vector<std::pair<double, double>> out;
    std::ifstream in(p);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
      if (line[0] == '#') continue;
      if (!header) {
        header = true;
        continue;
      }
      auto k = line.find(',');
      out.emplace_back(std::stod(line.substr(0, k)), std::stod(line.substr(k + 1)));
    }
    return out;
  };
  auto ra = rows(a / "nl_residual.csv"), rb = rows(b / "nl_residual.csv");
  REQUIRE(ra.size() == rb.size());
  REQUIRE(ra.size() > 10);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    CHECK(rb[i].first == 2 * ra[i].first);
    CHECK(rb[i].second == ra[i].second);
  }
}

TEST_CASE("analytic presets produce their sweep") {
  fs::path d = scratch("sweep");
  ExperimentConfig c = find_preset("fig_inference").config;
  c.out_dir = d.string();
  run_experiment(c);
  CHECK(header_row(d / "sweep.csv") == "mu,gamma_r,inference,epr_product,epr");
  c = find_preset("fig_nlmoment").config;
  c.out_dir = d.string();
  run_experiment(c);
  CHECK(header_row(d / "sweep.csv") == "mu,gamma_r,nl_plusp,nl_wigner");
}

TEST_CASE("command-line exit codes") {
  fs::path d = scratch("cli");
  CHECK(cli("list-presets") == 0);
  CHECK(cli("analytic fig_heisenberg --out " + (d / "h").string()) == 0);
  CHECK(fs::exists(d / "h" / "sweep.csv"));
  CHECK(fs::exists(d / "h" / "manifest.json"));
  CHECK(cli("preset no_such_preset") == 2);
  CHECK(cli("frobnicate") == 2);

  std::ofstream(d / "mu1.json") << R"({"params": {"g2": 0.001, "gamma_r": 1, "mu": 1},
    "outputs": ["spectra"], "analytic_only": true, "out_dir": ")" << (d / "mu1").string() << "\"}";
  CHECK(cli("run " + (d / "mu1.json").string()) == 2);
  std::ofstream(d / "bad.json") << "{\"params\": {\"g2\": 0.001}, \"outputs\": []}";
  CHECK(cli("run " + (d / "bad.json").string()) == 2);

  // zero coupling, vacuum input, step far past stability
  std::ofstream(d / "fault.json") << R"({"params": {"g2": 0, "gamma_r": 1, "mu": 0}, "representation": "wigner",
    "integrator": {"dt": 3, "record_interval": 3, "t_burn": 0, "t_record": 9000, "n_traj": 4,
                   "scheme": "euler_maruyama"},
    "spectral": {"t_seg": 300, "omega_max": 1}, "outputs": ["spectra"], "out_dir": ")"
                                    << (d / "fault").string() << "\"}";
  CHECK(cli("run " + (d / "fault.json").string()) == 3);
  auto m = nlohmann::json::parse(slurp(d / "fault" / "manifest.json"));
  CHECK(m["status"] == "fault_budget_exceeded");
  CHECK(m["faults"]["faulted"] == 4);
}

}  // TEST_SUITE
