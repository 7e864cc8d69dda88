#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "nopo/harness.hpp"

namespace nopo {

using nlohmann::json;

namespace {

const std::vector<std::pair<Output, std::string>> kOutputNames = {
    {Output::Spectra, "spectra"}, {Output::NlResidual, "nl_residual"}, {Output::Moments, "moments"},
    {Output::Triple, "triple"},   {Output::Epr, "epr"},                 {Output::Critical, "critical"},
    {Output::Sweep, "sweep"}};

// Reports the furthest character the parser has looked at.
struct TrackIt {
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* p = nullptr;
  const char** hi = nullptr;

  reference operator*() const {
    if (p > *hi) *hi = p;
    return *p;
  }
  TrackIt& operator++() {
    ++p;
    return *this;
  }
  TrackIt operator++(int) {
    TrackIt t = *this;
    ++p;
    return t;
  }
  bool operator==(const TrackIt& o) const { return p == o.p; }
  bool operator!=(const TrackIt& o) const { return p != o.p; }
};

struct Located {
  json doc;
  std::map<std::string, int> lines;  // JSON pointer -> line
};

Located parse_located(const std::string& text, const std::string& source) {
  Located out;
  const char* begin = text.data();
  const char* hi = begin;
  auto line_at = [&](const char* q) { return 1 + static_cast<int>(std::count(begin, q, '\n')); };

  struct Frame {
    bool array;
    std::string path;
    std::string key;
    std::size_t idx = 0;
  };
  std::vector<Frame> stack;
  auto element_path = [&]() -> std::string {
    if (stack.empty()) return "";
    Frame& f = stack.back();
    if (f.array) return f.path + "/" + std::to_string(f.idx++);
    return f.path + "/" + f.key;
  };

  auto cb = [&](int, json::parse_event_t ev, json& parsed) {
    switch (ev) {
      case json::parse_event_t::key:
        stack.back().key = parsed.get<std::string>();
        out.lines.emplace(stack.back().path + "/" + stack.back().key, line_at(hi));
        break;
      case json::parse_event_t::object_start:
      case json::parse_event_t::array_start: {
        bool in_array = !stack.empty() && stack.back().array;
        std::string p = element_path();
        if (in_array) out.lines.emplace(p, line_at(hi));
        stack.push_back({ev == json::parse_event_t::array_start, p, {}, 0});
        break;
      }
      case json::parse_event_t::object_end:
      case json::parse_event_t::array_end:
        stack.pop_back();
        break;
      case json::parse_event_t::value:
        if (!stack.empty() && stack.back().array) out.lines.emplace(element_path(), line_at(hi));
        break;
    }
    return true;
  };

  try {
    out.doc = json::parse(TrackIt{begin, &hi}, TrackIt{begin + text.size(), &hi}, cb, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return out;
}

using Locator = std::function<std::string(const std::string& pointer)>;

[[noreturn]] void fail(const Locator& loc, const std::string& pointer, const std::string& msg) {
  throw ConfigError(loc(pointer) + (pointer.empty() ? "/" : pointer) + ": " + msg);
}

// Typed access to one JSON object; unknown keys are rejected by done().
class Reader {
 public:
  Reader(const json& j, std::string path, const Locator& loc) : j_(j), path_(std::move(path)), loc_(loc) {
    if (!j_.is_object()) fail(loc_, path_, "expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }
  std::string at(const std::string& k) const { return path_ + "/" + k; }
  [[noreturn]] void error(const std::string& k, const std::string& msg) const { fail(loc_, at(k), msg); }

  const json& raw(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }

  double number(const std::string& k, double def) {
    seen_.insert(k);
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_number()) error(k, "expected a number");
    return v.get<double>();
  }
  std::optional<double> opt_number(const std::string& k) {
    seen_.insert(k);
    if (!has(k)) return std::nullopt;
    return number(k, 0.0);
  }
  std::size_t count(const std::string& k, std::size_t def) {
    seen_.insert(k);
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer()) error(k, "must be >= 0");
    if (v.is_number_float()) {
      double d = v.get<double>();
      if (d >= 0 && d == std::floor(d) && d < 9e15) return static_cast<std::size_t>(d);
    }
    error(k, "expected a non-negative integer");
  }
  bool boolean(const std::string& k, bool def) {
    seen_.insert(k);
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_boolean()) error(k, "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& k, const std::string& def) {
    seen_.insert(k);
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_string()) error(k, "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& k) {
    seen_.insert(k);
    std::vector<double> out;
    if (!has(k)) return out;
    const json& v = j_.at(k);
    if (!v.is_array()) error(k, "expected an array of numbers");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(loc_, at(k) + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  Reader child(const std::string& k) {
    seen_.insert(k);
    return Reader(j_.at(k), at(k), loc_);
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) error(it.key(), "unknown field");
  }

  // Runs a library validator and re-throws its ParameterError at this object.
  template <class F>
  void check(F f) const {
    try {
      f();
    } catch (const ConfigError&) {
      throw;
    } catch (const ParameterError& e) {
      fail(loc_, path_, e.what());
    }
  }

 private:
  const json& j_;
  std::string path_;
  const Locator& loc_;
  std::set<std::string> seen_;
};

// Points a library validator's message ("integrator.dt must ...") at its field.
[[noreturn]] void fail_section(const Locator& loc, const std::string& section, const std::set<std::string>& keys,
                               const ParameterError& e) {
  std::string msg = e.what();
  std::string tok = msg.substr(0, msg.find(' '));
  if (tok.rfind(section + ".", 0) == 0) tok = tok.substr(section.size() + 1);
  fail(loc, "/" + section + (keys.count(tok) ? "/" + tok : ""), msg);
}

void validate_impl(const ExperimentConfig& c, const Locator& loc) {
  if (c.params.has_value() == c.physical.has_value())
    fail(loc, "", "exactly one of 'params' or 'physical' is required");
  if (c.params) {
    const auto& p = *c.params;
    if (!std::isfinite(p.g2) || p.g2 < 0) fail(loc, "/params/g2", "must be finite and >= 0");
    if (!std::isfinite(p.gamma_r) || p.gamma_r <= 0) fail(loc, "/params/gamma_r", "must be > 0");
    if (!std::isfinite(p.mu) || p.mu < 0) fail(loc, "/params/mu", "must be finite and >= 0");
    if (!std::isfinite(p.gamma) || p.gamma <= 0) fail(loc, "/params/gamma", "must be > 0");
    if (p.mu > 0 && p.g2 == 0) fail(loc, "/params/mu", "mu > 0 needs g2 > 0");
  } else {
    try {
      validate(*c.physical);
    } catch (const ParameterError& e) {
      fail_section(loc, "physical", {"gamma0", "gamma", "chi", "drive"}, e);
    }
  }
  if (c.outputs.empty()) fail(loc, "/outputs", "at least one output is required");
  auto wants = [&](Output o) { return std::find(c.outputs.begin(), c.outputs.end(), o) != c.outputs.end(); };
  try {
    validate(c.integrator);
  } catch (const ParameterError& e) {
    fail_section(loc, "integrator", {"dt", "t_burn", "t_record", "n_traj", "record_interval"}, e);
  }
  try {
    validate(c.spectral);
  } catch (const ParameterError& e) {
    fail_section(loc, "spectral", {"t_seg", "omega_max", "band"}, e);
  }
  if (wants(Output::Sweep)) {
    if (!c.sweep) fail(loc, "/sweep", "required by the 'sweep' output");
    const auto& s = *c.sweep;
    const auto& kinds = sweep_kinds();
    if (std::find(kinds.begin(), kinds.end(), s.kind) == kinds.end())
      fail(loc, "/sweep/kind", "unknown sweep kind '" + s.kind + "'");
    if (s.mu_points < 1) fail(loc, "/sweep/mu_points", "must be >= 1");
    if (!std::isfinite(s.mu_start) || !std::isfinite(s.mu_stop) || s.mu_start < 0 || s.mu_stop < s.mu_start)
      fail(loc, "/sweep", "need 0 <= mu_start <= mu_stop");
    for (double g : s.gamma_r)
      if (!(g > 0) || !std::isfinite(g)) fail(loc, "/sweep/gamma_r", "entries must be > 0");
  }
  if (wants(Output::Triple)) {
    if (c.triple.half < 0) fail(loc, "/triple/half", "must be >= 0");
    if (!(c.triple.t_seg > 0)) fail(loc, "/triple/t_seg", "must be > 0");
  }
  if (wants(Output::Critical)) {
    if (c.critical.eta.empty()) fail(loc, "/critical/eta", "required by the 'critical' output");
    for (double e : c.critical.eta)
      if (!std::isfinite(e)) fail(loc, "/critical/eta", "entries must be finite");
    if (!c.analytic_only) {
      try {
        validate(c.critical.sim);
      } catch (const ParameterError& e) {
        fail_section(loc, "critical", {"dt", "t_burn", "t_record", "n_traj", "sample_interval"}, e);
      }
    }
  }
  if (c.out_dir.empty()) fail(loc, "/out_dir", "must not be empty");
}

ExperimentConfig read_config(const json& root, const std::string& base, const Locator& loc) {
  Reader r(root, base, loc);
  ExperimentConfig c;
  c.name = r.string("name", c.name);
  c.figure = r.string("figure", c.figure);
  r.check([&] { c.rep = representation_from_string(r.string("representation", to_string(c.rep))); });

  if (r.has("params")) {
    Reader p = r.child("params");
    ScaledTriple s;
    s.g2 = p.number("g2", s.g2);
    s.gamma_r = p.number("gamma_r", s.gamma_r);
    s.mu = p.number("mu", s.mu);
    s.gamma = p.number("gamma", s.gamma);
    p.done();
    c.params = s;
  } else {
    r.number("params", 0);  // mark seen when null
  }
  if (r.has("physical")) {
    Reader p = r.child("physical");
    PhysicalParams q;
    q.gamma0 = p.number("gamma0", q.gamma0);
    q.gamma = p.number("gamma", q.gamma);
    q.chi = p.number("chi", q.chi);
    if (p.has("drive")) {
      const json& d = p.raw("drive");
      if (d.is_number()) {
        q.drive = d.get<double>();
      } else if (d.is_array() && d.size() == 2 && d[0].is_number() && d[1].is_number()) {
        q.drive = cplx(d[0].get<double>(), d[1].get<double>());
      } else {
        p.error("drive", "expected a number or [re, im]");
      }
    } else {
      p.number("drive", 0);
    }
    p.done();
    c.physical = q;
  } else {
    r.number("physical", 0);
  }

  c.integrator.seed = r.count("seed", 1);
  c.critical.sim.seed = c.integrator.seed;

  if (r.has("integrator")) {
    Reader p = r.child("integrator");
    auto& ic = c.integrator;
    ic.dt = p.number("dt", ic.dt);
    ic.t_burn = p.opt_number("t_burn");
    ic.t_record = p.number("t_record", ic.t_record);
    ic.n_traj = p.count("n_traj", ic.n_traj);
    p.check([&] { ic.scheme = scheme_from_string(p.string("scheme", to_string(ic.scheme))); });
    ic.record_interval = p.number("record_interval", ic.record_interval);
    ic.linear_shadow = p.boolean("linear_shadow", ic.linear_shadow);
    p.done();
  }
  if (r.has("spectral")) {
    Reader p = r.child("spectral");
    auto& s = c.spectral;
    s.t_seg = p.number("t_seg", s.t_seg);
    s.omega_max = p.number("omega_max", s.omega_max);
    s.band = p.count("band", s.band);
    s.thetas = p.numbers("thetas");
    p.done();
  }
  if (r.has("outputs")) {
    const json& o = r.raw("outputs");
    if (!o.is_array()) r.error("outputs", "expected an array of output names");
    for (std::size_t i = 0; i < o.size(); ++i) {
      std::string at = r.at("outputs") + "/" + std::to_string(i);
      if (!o[i].is_string()) fail(loc, at, "expected a string");
      try {
        c.outputs.push_back(output_from_string(o[i].get<std::string>()));
      } catch (const ParameterError& e) {
        fail(loc, at, e.what());
      }
    }
  }
  c.analytic_only = r.boolean("analytic_only", c.analytic_only);
  c.physical_units = r.boolean("physical_units", c.physical_units);
  if (r.has("sweep")) {
    Reader p = r.child("sweep");
    SweepSettings s;
    s.kind = p.string("kind", s.kind);
    s.mu_start = p.number("mu_start", s.mu_start);
    s.mu_stop = p.number("mu_stop", s.mu_stop);
    s.mu_points = p.count("mu_points", s.mu_points);
    s.gamma_r = p.numbers("gamma_r");
    s.omega = p.number("omega", s.omega);
    p.done();
    c.sweep = s;
  } else {
    r.number("sweep", 0);
  }
  if (r.has("triple")) {
    Reader p = r.child("triple");
    double h = p.number("half", c.triple.half);
    if (h != std::floor(h) || std::abs(h) > 1e6) p.error("half", "expected an integer");
    c.triple.half = static_cast<int>(h);
    c.triple.t_seg = p.number("t_seg", c.triple.t_seg);
    p.done();
  }
  if (r.has("critical")) {
    Reader p = r.child("critical");
    auto& s = c.critical.sim;
    c.critical.eta = p.numbers("eta");
    s.dt = p.number("dt", s.dt);
    s.t_burn = p.number("t_burn", s.t_burn);
    s.t_record = p.number("t_record", s.t_record);
    s.n_traj = p.count("n_traj", s.n_traj);
    s.sample_interval = p.number("sample_interval", s.sample_interval);
    p.done();
  }
  c.out_dir = r.string("out_dir", c.out_dir);
  r.done();
  validate_impl(c, [&](const std::string& p) { return loc(base + p); });
  return c;
}

}  // namespace

std::string to_string(Output o) {
  for (const auto& [k, v] : kOutputNames)
    if (k == o) return v;
  return "?";
}

Output output_from_string(const std::string& s) {
  for (const auto& [k, v] : kOutputNames)
    if (v == s) return k;
  throw ParameterError("unknown output '" + s + "'");
}

const std::vector<std::string>& sweep_kinds() {
  static const std::vector<std::string> k = {"total_moment", "nl_moment",  "opt_squeeze",
                                             "unsqueeze",    "heisenberg", "inference"};
  return k;
}

void validate(const ExperimentConfig& cfg) {
  validate_impl(cfg, [](const std::string&) { return std::string("config: "); });
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  Located l = parse_located(text, source);
  Locator loc = [&](const std::string& pointer) {
    std::string p = pointer;
    for (;;) {
      auto it = l.lines.find(p);
      if (it != l.lines.end()) return source + ":" + std::to_string(it->second) + ": ";
      auto cut = p.rfind('/');
      if (cut == std::string::npos || p.empty()) return source + ": ";
      p = p.substr(0, cut);
    }
  };
  if (!l.doc.is_object()) fail(loc, "", "expected a JSON object");
  if (l.doc.contains("manifest_version")) {
    if (!l.doc.contains("config")) fail(loc, "", "manifest has no 'config' member");
    return read_config(l.doc.at("config"), "/config", loc);
  }
  return read_config(l.doc, "", loc);
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.string());
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["figure"] = c.figure;
  j["representation"] = to_string(c.rep);
  if (c.params)
    j["params"] = {{"g2", c.params->g2}, {"gamma_r", c.params->gamma_r}, {"mu", c.params->mu},
                   {"gamma", c.params->gamma}};
  if (c.physical)
    j["physical"] = {{"gamma0", c.physical->gamma0},
                     {"gamma", c.physical->gamma},
                     {"chi", c.physical->chi},
                     {"drive", {c.physical->drive.real(), c.physical->drive.imag()}}};
  j["seed"] = c.integrator.seed;
  const auto& ic = c.integrator;
  j["integrator"] = {{"dt", ic.dt},
                     {"t_burn", ic.t_burn ? json(*ic.t_burn) : json(nullptr)},
                     {"t_record", ic.t_record},
                     {"n_traj", ic.n_traj},
                     {"scheme", to_string(ic.scheme)},
                     {"record_interval", ic.record_interval},
                     {"linear_shadow", ic.linear_shadow}};
  j["spectral"] = {{"t_seg", c.spectral.t_seg},
                   {"omega_max", c.spectral.omega_max},
                   {"band", c.spectral.band},
                   {"thetas", c.spectral.thetas}};
  json outs = json::array();
  for (Output o : c.outputs) outs.push_back(to_string(o));
  j["outputs"] = outs;
  j["analytic_only"] = c.analytic_only;
  j["physical_units"] = c.physical_units;
  if (c.sweep)
    j["sweep"] = {{"kind", c.sweep->kind},         {"mu_start", c.sweep->mu_start},
                  {"mu_stop", c.sweep->mu_stop},   {"mu_points", c.sweep->mu_points},
                  {"gamma_r", c.sweep->gamma_r},   {"omega", c.sweep->omega}};
  j["triple"] = {{"half", c.triple.half}, {"t_seg", c.triple.t_seg}};
  const auto& cs = c.critical.sim;
  j["critical"] = {{"eta", c.critical.eta},          {"dt", cs.dt},
                   {"t_burn", cs.t_burn},            {"t_record", cs.t_record},
                   {"n_traj", cs.n_traj},            {"sample_interval", cs.sample_interval}};
  j["out_dir"] = c.out_dir;
  return j;
}

PhysicalParams resolve_physical(const ExperimentConfig& c) {
  if (c.physical) return *c.physical;
  if (!c.params) throw ConfigError("config: /: exactly one of 'params' or 'physical' is required");
  return physical_from_scaled(c.params->g2, c.params->gamma_r, c.params->mu, c.params->gamma);
}

}  // namespace nopo
