#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "radpair/analysis.hpp"
#include "radpair/errors.hpp"
#include "radpair/experiments.hpp"

namespace radpair::io {

using nlohmann::json;

inline constexpr const char* kSchemaVersion = "v1";

class ParseError : public InputError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ValidationError : public InputError {
 public:
  ValidationError(std::string path, std::string reason);
  const std::string& path() const { return path_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string path_;
  std::string reason_;
};

struct MfeSpec {
  std::vector<double> b_values;  // mT
};

struct OdmrSpec {
  double freq_min = 1000.0;  // MHz
  double freq_max = 1400.0;
  double freq_step = 2.0;
  std::vector<double> frequencies() const;
};

struct MapSpec {
  std::vector<double> b0_values;  // mT
  double freq_span = 400.0;       // MHz
  double freq_step = 2.0;
};

struct MutantSpec {
  ModelConfig mutant;
  json mutant_source;  // preset name or fragment, as given
};

struct AnalyzeSpec {
  FitRange fit_range;
  BaselineSpec baseline;
  double min_prominence = 0.0;  // 0: 5% of the largest feature
  PeakRefinement refinement = PeakRefinement::Parabolic;
  double centroid_threshold = 0.1;
  bool subtract_baseline = false;
  bool free_intercept = false;
};

struct RunConfig {
  std::string description;
  std::string preset;
  ModelConfig model;
  MfeSpec mfe;
  OdmrSpec odmr;
  MapSpec map;
  MutantSpec mutant;
  EmulatorConfig emulate;
  AnalyzeSpec analyze;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: environment or hardware default

  // Fully resolved tree the typed fields were read from.
  json resolved;
};

// Every key with its default value; presets and user files patch this.
const json& default_config();

// Merges defaults, the named preset (from the "preset" key) and `user`, then
// validates. Throws ValidationError naming the offending key path.
RunConfig resolve_config(const json& user);

// Throws ParseError with the 1-based line and column of a syntax error.
json parse_json_text(const std::string& text);
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

json serialize(const RunConfig& config);

// FNV-1a over the canonical dump of the resolved config, ignoring threads.
std::string config_hash(const RunConfig& config);

}  // namespace radpair::io
