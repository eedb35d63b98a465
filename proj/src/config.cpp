#include "radpair/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "radpair/presets.hpp"

namespace radpair::io {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : InputError("parse error at line " + std::to_string(line) + ", column " +
                 std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

ValidationError::ValidationError(std::string path, std::string reason)
    : InputError(path + ": " + reason), path_(std::move(path)), reason_(std::move(reason)) {}

std::vector<double> OdmrSpec::frequencies() const {
  return frequency_grid(freq_min, freq_max, freq_step);
}

const json& default_config() {
  static const json defaults = json::parse(R"({
    "schema": "v1",
    "description": "",
    "preset": "",
    "system": {
      "electron_a": {"g": 2.0023},
      "electron_b": {"g": 2.0023},
      "nuclei": [],
      "dipolar_d": 0.0,
      "exchange_j": 0.0,
      "dipolar_axis": [0.0, 0.0, 1.0],
      "nuclear_zeeman": false,
      "label": ""
    },
    "kinetics": {"k_singlet": 1.0, "k_triplet": 1.0},
    "initial_state": "singlet_born",
    "photocycle": {
      "excitation_rate": 0.01,
      "rp_formation_yield": 0.5,
      "triplet_product_lifetime": 1000.0,
      "fluorescence_per_ground_excitation": 1.0
    },
    "fields": {"b0": 43.2, "rf_b1": 0.1, "rf_phase": 0.0, "b1_scale_a": 1.0, "b1_scale_b": 1.0},
    "numerics": {
      "dt": 0.0,
      "eps_trunc": 1e-6,
      "rwa_enabled": true,
      "orientation_grid": 0,
      "allow_negative_fields": false
    },
    "marker": null,
    "experiment": {
      "mfe": {"b_min": 0.0, "b_max": 15.0, "b_step": 0.5},
      "odmr": {"freq_min": 1000.0, "freq_max": 1400.0, "freq_step": 2.0},
      "map": {"b0_values": [43.2, 49.9, 56.0, 62.0, 69.2], "freq_span": 400.0, "freq_step": 2.0},
      "mutant": {"mutant": "dmcry_w394f_proxy"},
      "emulate": {
        "mode": "odmr",
        "true_contrast": 0.01,
        "baseline": 1.0,
        "bleach_slope": -0.0002,
        "n_cycles": 50,
        "noise": {"model": "shot", "scale": 10000.0, "sigma": 0.0},
        "timing": {"rf_window_s": 1.0, "recovery_s": 9.0, "exposure_s": 1.0, "mfe_frame_s": 0.5}
      },
      "analyze": {
        "fit_range": null,
        "baseline": {"mode": "unity", "value": 1.0, "cycles": 0},
        "min_prominence": 0.0,
        "refinement": "parabolic",
        "centroid_threshold": 0.1,
        "subtract_baseline": false,
        "free_intercept": false
      }
    },
    "seed": 0,
    "threads": "auto"
  })");
  return defaults;
}

namespace {

// Recursive object merge. Unlike RFC 7386 merge-patch, a null value is kept
// as null, so a resolved tree resolves to itself.
void overlay(json& base, const json& patch) {
  if (!patch.is_object() || !base.is_object()) {
    base = patch;
    return;
  }
  for (const auto& item : patch.items()) overlay(base[item.key()], item.value());
}

[[noreturn]] void fail(const std::string& path, const std::string& reason) {
  throw ValidationError(path, reason);
}

// Typed access to one JSON object; records which keys were read so that
// anything left over can be rejected.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it != j_.end() && !it->is_null();
  }

  const json& at(const std::string& key) {
    if (!has(key)) fail(child(key), "missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) fail(child(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(child(key), "not finite");
    return d;
  }

  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::uint64_t count(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      fail(child(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool flag(const std::string& key) {
    const json& v = at(key);
    if (!v.is_boolean()) fail(child(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) fail(child(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) fail(child(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(child(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  void done() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) fail(child(item.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Runs a domain validator and re-labels its failure with a config path.
template <typename F>
void check(const std::string& path, F&& f) {
  try {
    f();
  } catch (const ValidationError&) {
    throw;
  } catch (const InputError& e) {
    fail(path, e.what());
  }
}

SpinSpecies read_nuclear_species(const json& v, const std::string& path) {
  SpinSpecies s;
  if (v.is_string()) {
    const auto name = v.get<std::string>();
    struct Known { const char* name; int twice; double gamma; };
    static constexpr Known known[] = {
        {"1H", 1, 0.0425775}, {"2H", 2, 0.0065359}, {"13C", 1, 0.0107084},
        {"14N", 2, 0.0030777}, {"15N", 1, -0.0043173}};
    for (const auto& k : known) {
      if (name == k.name) {
        s.twice_spin = k.twice;
        s.gyromagnetic_ratio = k.gamma;
        s.name = k.name;
        return s;
      }
    }
    fail(path, "unknown species '" + name + "' (1H, 2H, 13C, 14N, 15N or {spin, gamma})");
  }
  Obj o(v, path);
  const double spin = o.number("spin");
  const double twice = 2.0 * spin;
  if (twice < 1.0 || std::abs(twice - std::round(twice)) > 1e-12) {
    fail(o.child("spin"), "spin must be a positive multiple of 1/2");
  }
  s.twice_spin = static_cast<int>(std::lround(twice));
  s.gyromagnetic_ratio = o.number("gamma", 0.0);
  s.name = o.has("name") ? o.text("name") : "custom";
  o.done();
  return s;
}

Eigen::Matrix3d read_tensor(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>() * Eigen::Matrix3d::Identity();
  if (!v.is_array() || v.size() != 3) fail(path, "expected a number or a 3x3 array");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    const json& row = v[r];
    if (!row.is_array() || row.size() != 3) fail(path, "expected a number or a 3x3 array");
    for (int c = 0; c < 3; ++c) {
      if (!row[c].is_number()) fail(path, "expected numeric entries");
      m(r, c) = row[c].get<double>();
    }
  }
  if (!m.allFinite()) fail(path, "not finite");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    fail(path, "not symmetric");
  }
  return m;
}

SpinSpecies read_electron(Obj&& o) {
  SpinSpecies e = electron(o.number("g"));
  o.done();
  return e;
}

SpinSystem read_system(const json& j, const std::string& path) {
  Obj o(j, path);
  SpinSystem s;
  s.electron_a = read_electron(Obj(o.at("electron_a"), o.child("electron_a")));
  s.electron_b = read_electron(Obj(o.at("electron_b"), o.child("electron_b")));
  const json& nuclei = o.at("nuclei");
  if (!nuclei.is_array()) fail(o.child("nuclei"), "expected an array");
  for (std::size_t i = 0; i < nuclei.size(); ++i) {
    const std::string np = o.child("nuclei") + "[" + std::to_string(i) + "]";
    Obj n(nuclei[i], np);
    Nucleus nuc;
    nuc.species = read_nuclear_species(n.at("species"), n.child("species"));
    const std::string radical = n.text("radical");
    if (radical == "A") {
      nuc.radical = Radical::A;
    } else if (radical == "B") {
      nuc.radical = Radical::B;
    } else {
      fail(n.child("radical"), "expected \"A\" or \"B\"");
    }
    nuc.hyperfine = read_tensor(n.at("hyperfine"), n.child("hyperfine"));
    n.done();
    s.nuclei.push_back(std::move(nuc));
  }
  s.dipolar_d = o.number("dipolar_d");
  s.exchange_j = o.number("exchange_j");
  const auto axis = o.numbers("dipolar_axis");
  if (axis.size() != 3) fail(o.child("dipolar_axis"), "expected 3 components");
  s.dipolar_axis = Eigen::Vector3d(axis[0], axis[1], axis[2]);
  s.nuclear_zeeman = o.flag("nuclear_zeeman");
  s.label = o.text("label");
  o.done();
  check(path, [&] { validate(s); });
  return s;
}

// Model-level keys shared by the main config and mutant fragments.
constexpr const char* kModelKeys[] = {"system",   "kinetics", "initial_state", "photocycle",
                                      "fields",   "numerics", "marker"};

ModelConfig read_model(Obj& root, const std::string& prefix) {
  auto path = [&](const std::string& key) { return prefix.empty() ? key : prefix + "." + key; };
  ModelConfig m;
  m.system = read_system(root.at("system"), path("system"));

  {
    Obj k(root.at("kinetics"), path("kinetics"));
    m.kinetics.k_singlet = k.number("k_singlet");
    m.kinetics.k_triplet = k.number("k_triplet");
    k.done();
    check(path("kinetics"), [&] { validate(m.kinetics); });
  }

  check(path("initial_state"),
        [&] { m.initial_state = parse_initial_state(root.text("initial_state")); });

  {
    Obj p(root.at("photocycle"), path("photocycle"));
    m.photocycle.excitation_rate = p.number("excitation_rate");
    m.photocycle.rp_formation_yield = p.number("rp_formation_yield");
    m.photocycle.triplet_product_lifetime = p.number("triplet_product_lifetime");
    m.photocycle.fluorescence_per_ground_excitation =
        p.number("fluorescence_per_ground_excitation");
    p.done();
    check(path("photocycle"), [&] { validate(m.photocycle); });
  }

  {
    Obj f(root.at("fields"), path("fields"));
    m.fields.b0 = f.number("b0");
    m.fields.rf_b1 = f.number("rf_b1");
    m.fields.rf_phase = f.number("rf_phase");
    m.fields.b1_scale_a = f.number("b1_scale_a");
    m.fields.b1_scale_b = f.number("b1_scale_b");
    f.done();
    if (m.fields.rf_b1 < 0.0) fail(f.child("rf_b1"), "must be >= 0");
    check(path("fields"), [&] { validate(m.fields); });
  }

  {
    Obj n(root.at("numerics"), path("numerics"));
    m.numerics.dt = n.number("dt");
    m.numerics.eps_trunc = n.number("eps_trunc");
    m.numerics.rwa_enabled = n.flag("rwa_enabled");
    m.numerics.orientation_grid = static_cast<std::size_t>(n.count("orientation_grid"));
    m.numerics.allow_negative_fields = n.flag("allow_negative_fields");
    n.done();
  }

  if (root.has("marker")) {
    Obj mk(root.at("marker"), path("marker"));
    MarkerLine line;
    line.g = mk.number("g", line.g);
    line.t1 = mk.number("t1", line.t1);
    line.t2 = mk.number("t2", line.t2);
    line.max_contrast = mk.number("max_contrast", line.max_contrast);
    mk.done();
    m.marker = line;
  }
  check(path("numerics"), [&] { validate(m); });
  return m;
}

json model_part(const json& j) {
  json out = json::object();
  for (const char* key : kModelKeys) {
    if (j.contains(key)) out[key] = j.at(key);
  }
  return out;
}

json with_preset(const json& user) {
  json merged = default_config();
  if (!user.is_object()) fail("", "config root must be an object");
  const auto it = user.find("preset");
  if (it != user.end() && !it->is_null()) {
    if (!it->is_string()) fail("preset", "expected a string");
    const auto name = it->get<std::string>();
    if (!name.empty()) overlay(merged, preset(name));
  }
  overlay(merged, user);
  return merged;
}

RunConfig read_run_config(const json& resolved) {
  RunConfig c;
  c.resolved = resolved;
  Obj root(resolved, "");
  if (root.text("schema") != kSchemaVersion) {
    fail("schema", std::string("unsupported schema version (expected \"") + kSchemaVersion + "\")");
  }
  c.description = root.text("description");
  c.preset = root.text("preset");
  c.model = read_model(root, "");

  Obj ex(root.at("experiment"), "experiment");
  {
    Obj o(ex.at("mfe"), ex.child("mfe"));
    if (o.has("b_values")) {
      c.mfe.b_values = o.numbers("b_values");
    } else {
      const double lo = o.number("b_min");
      const double hi = o.number("b_max");
      const double step = o.number("b_step");
      if (!(step > 0.0) || hi < lo) fail(o.child("b_step"), "need b_step > 0 and b_max >= b_min");
      const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
      for (std::size_t i = 0; i < n; ++i) c.mfe.b_values.push_back(lo + static_cast<double>(i) * step);
    }
    o.has("b_min");
    o.has("b_max");
    o.has("b_step");
    o.done();
  }
  {
    Obj o(ex.at("odmr"), ex.child("odmr"));
    c.odmr.freq_min = o.number("freq_min");
    c.odmr.freq_max = o.number("freq_max");
    c.odmr.freq_step = o.number("freq_step");
    o.done();
    check(ex.child("odmr"), [&] { (void)c.odmr.frequencies(); });
  }
  {
    Obj o(ex.at("map"), ex.child("map"));
    c.map.b0_values = o.numbers("b0_values");
    c.map.freq_span = o.number("freq_span");
    c.map.freq_step = o.number("freq_step");
    o.done();
    if (!(c.map.freq_span > 0.0) || !(c.map.freq_step > 0.0)) {
      fail(ex.child("map"), "freq_span and freq_step must be positive");
    }
  }
  {
    Obj o(ex.at("mutant"), ex.child("mutant"));
    const std::string mp = o.child("mutant");
    const json& src = o.at("mutant");
    c.mutant.mutant_source = src;
    json mj = model_part(resolved);
    if (src.is_string()) {
      overlay(mj, model_part(preset(src.get<std::string>())));
    } else if (src.is_object()) {
      for (const auto& item : src.items()) {
        bool known = false;
        for (const char* key : kModelKeys) known = known || item.key() == key;
        if (!known) fail(mp + "." + item.key(), "unknown key");
      }
      overlay(mj, src);
    } else {
      fail(mp, "expected a preset name or a config fragment");
    }
    Obj mo(mj, mp);
    c.mutant.mutant = read_model(mo, mp);
    mo.done();
    o.done();
  }
  {
    Obj o(ex.at("emulate"), ex.child("emulate"));
    EmulatorConfig& e = c.emulate;
    const std::string mode = o.text("mode");
    if (mode == "odmr") {
      e.mode = EmulatorMode::Odmr;
    } else if (mode == "mfe") {
      e.mode = EmulatorMode::Mfe;
    } else {
      fail(o.child("mode"), "expected \"odmr\" or \"mfe\"");
    }
    e.true_contrast = o.number("true_contrast");
    e.baseline = o.number("baseline");
    if (e.baseline < 0.0) fail(o.child("baseline"), "must be non-negative");
    e.bleach_slope = o.number("bleach_slope");
    e.n_cycles = static_cast<std::size_t>(o.count("n_cycles"));
    if (e.n_cycles < 1) fail(o.child("n_cycles"), "must be >= 1");
    {
      Obj n(o.at("noise"), o.child("noise"));
      const std::string model = n.text("model");
      if (model == "none") {
        e.noise.model = NoiseModel::None;
      } else if (model == "shot") {
        e.noise.model = NoiseModel::Shot;
      } else if (model == "gaussian") {
        e.noise.model = NoiseModel::Gaussian;
      } else {
        fail(n.child("model"), "expected \"none\", \"shot\" or \"gaussian\"");
      }
      e.noise.scale = n.number("scale");
      e.noise.sigma = n.number("sigma");
      if (!(e.noise.scale > 0.0)) fail(n.child("scale"), "must be positive");
      if (e.noise.sigma < 0.0) fail(n.child("sigma"), "must be non-negative");
      n.done();
    }
    {
      Obj t(o.at("timing"), o.child("timing"));
      e.timing.rf_window_s = t.number("rf_window_s");
      e.timing.recovery_s = t.number("recovery_s");
      e.timing.exposure_s = t.number("exposure_s");
      e.timing.mfe_frame_s = t.number("mfe_frame_s");
      t.done();
      if (!(e.timing.rf_window_s > 0.0) || !(e.timing.exposure_s > 0.0) ||
          !(e.timing.mfe_frame_s > 0.0) || e.timing.recovery_s < 0.0) {
        fail(o.child("timing"), "windows must be positive and recovery non-negative");
      }
    }
    o.done();
  }
  {
    Obj o(ex.at("analyze"), ex.child("analyze"));
    AnalyzeSpec& a = c.analyze;
    if (o.has("fit_range")) {
      const auto r = o.numbers("fit_range");
      if (r.size() != 2 || !(r[1] > r[0])) {
        fail(o.child("fit_range"), "expected [t_min, t_max] with t_max > t_min");
      }
      a.fit_range = FitRange{r[0], r[1]};
    }
    {
      Obj b(o.at("baseline"), o.child("baseline"));
      const std::string mode = b.text("mode");
      if (mode == "unity") {
        a.baseline.mode = BaselineMode::Unity;
      } else if (mode == "value") {
        a.baseline.mode = BaselineMode::Value;
      } else if (mode == "leading_cycles") {
        a.baseline.mode = BaselineMode::LeadingCycles;
      } else {
        fail(b.child("mode"), "expected \"unity\", \"value\" or \"leading_cycles\"");
      }
      a.baseline.value = b.number("value");
      a.baseline.cycles = static_cast<std::size_t>(b.count("cycles"));
      b.done();
      if (a.baseline.mode == BaselineMode::LeadingCycles && a.baseline.cycles == 0) {
        fail(b.child("cycles"), "leading_cycles baseline needs cycles >= 1");
      }
    }
    a.min_prominence = o.number("min_prominence");
    if (a.min_prominence < 0.0) fail(o.child("min_prominence"), "must be >= 0");
    const std::string refinement = o.text("refinement");
    if (refinement == "parabolic") {
      a.refinement = PeakRefinement::Parabolic;
    } else if (refinement == "lorentzian") {
      a.refinement = PeakRefinement::Lorentzian;
    } else {
      fail(o.child("refinement"), "expected \"parabolic\" or \"lorentzian\"");
    }
    a.centroid_threshold = o.number("centroid_threshold");
    if (!(a.centroid_threshold >= 0.0 && a.centroid_threshold < 1.0)) {
      fail(o.child("centroid_threshold"), "must lie in [0, 1)");
    }
    a.subtract_baseline = o.flag("subtract_baseline");
    a.free_intercept = o.flag("free_intercept");
    o.done();
  }
  ex.done();

  c.seed = root.count("seed");
  const json& threads = root.at("threads");
  if (threads.is_string() && threads.get<std::string>() == "auto") {
    c.threads = 0;
  } else if (threads.is_number_integer() && threads.get<long long>() >= 0) {
    c.threads = threads.get<unsigned>();
  } else {
    fail("threads", "expected \"auto\" or a non-negative integer");
  }
  root.done();
  return c;
}

}  // namespace

RunConfig resolve_config(const json& user) { return read_run_config(with_preset(user)); }

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    const auto colon = what.find(": ", what.find("parse error"));
    if (colon != std::string::npos) what = what.substr(colon + 2);
    throw ParseError(line, column, what);
  }
}

RunConfig parse_config(const std::string& text) { return resolve_config(parse_json_text(text)); }

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

json serialize(const RunConfig& config) { return config.resolved; }

std::string config_hash(const RunConfig& config) {
  json j = config.resolved;
  j.erase("threads");
  const std::string text = j.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace radpair::io
