#include "radpair/presets.hpp"

#include <map>

#include "radpair/config.hpp"

namespace radpair::io {

namespace {

// FAD-Trp pair reduced to its three strongest couplings: flavin N5, Trp N1
// and one Trp H-beta, all isotropic.
constexpr const char* kFadTrpSystem = R"({
  "electron_a": {"g": 2.0023},
  "electron_b": {"g": 2.0023},
  "nuclei": [
    {"species": "14N", "radical": "A", "hyperfine": 11.0},
    {"species": "14N", "radical": "B", "hyperfine": 9.0},
    {"species": "1H", "radical": "B", "hyperfine": 45.0}
  ],
  "dipolar_d": -8.0,
  "exchange_j": 0.0,
  "label": "fad_trp"
})";

const std::map<std::string, json, std::less<>>& table() {
  static const std::map<std::string, json, std::less<>> presets = [] {
    std::map<std::string, json, std::less<>> t;
    const json fad_trp = json::parse(kFadTrpSystem);

    t["toy_1proton"] = json::parse(R"({
      "description": "one isotropic proton (50 MHz) on radical A",
      "system": {
        "electron_a": {"g": 2.0023},
        "electron_b": {"g": 2.0023},
        "nuclei": [{"species": "1H", "radical": "A", "hyperfine": 50.0}],
        "dipolar_d": 0.0,
        "exchange_j": 0.0,
        "label": "toy_1proton"
      },
      "kinetics": {"k_singlet": 1.0, "k_triplet": 1.0},
      "initial_state": "singlet_born",
      "fields": {"b0": 43.2, "rf_b1": 0.1}
    })");

    json minimal = json::parse(R"({
      "description": "minimal FAD-Trp radical pair",
      "kinetics": {"k_singlet": 1.0, "k_triplet": 1.0},
      "initial_state": "singlet_born",
      "fields": {"b0": 43.2, "rf_b1": 0.1}
    })");
    minimal["system"] = fad_trp;
    t["fad_trp_minimal"] = minimal;

    json wt = json::parse(R"({
      "description": "wild-type cryptochrome proxy",
      "kinetics": {"k_singlet": 1.0, "k_triplet": 1.0},
      "initial_state": "triplet_born",
      "photocycle": {"triplet_product_lifetime": 1000.0},
      "fields": {"b0": 43.2, "rf_b1": 0.1}
    })");
    wt["system"] = fad_trp;
    wt["system"]["label"] = "dmcry_wt";
    t["dmcry_wt_proxy"] = wt;

    // Mutant knobs: short-lived downstream product, faster recombination,
    // closer partners.
    json mutant = wt;
    mutant["description"] = "W394F mutant proxy";
    mutant["kinetics"] = {{"k_singlet", 10.0}, {"k_triplet", 10.0}};
    mutant["photocycle"]["triplet_product_lifetime"] = 10.0;
    mutant["system"]["dipolar_d"] = -10.0;
    mutant["system"]["label"] = "dmcry_w394f";
    t["dmcry_w394f_proxy"] = mutant;

    t["bnnt_marker"] = json::parse(R"({
      "description": "bare S=1/2 g-marker line",
      "system": {
        "electron_a": {"g": 2.0023},
        "electron_b": {"g": 2.0023},
        "nuclei": [],
        "dipolar_d": 0.0,
        "exchange_j": 0.0,
        "label": "bnnt_marker"
      },
      "marker": {"g": 2.0023, "t1": 1.0, "t2": 0.1, "max_contrast": 0.01},
      "fields": {"b0": 43.2, "rf_b1": 0.1}
    })");
    return t;
  }();
  return presets;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : table()) out.push_back(name);
  return out;
}

const json& preset(std::string_view name) {
  const auto& t = table();
  const auto it = t.find(name);
  if (it == t.end()) {
    std::string known;
    for (const auto& [n, _] : t) known += (known.empty() ? "" : ", ") + n;
    throw ValidationError("preset", "unknown preset '" + std::string(name) + "' (known: " + known + ")");
  }
  return it->second;
}

}  // namespace radpair::io
