#include "radpair/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "radpair/config.hpp"
#include "radpair/csv.hpp"
#include "radpair/parallel.hpp"
#include "radpair/svg.hpp"

#ifndef RADPAIR_VERSION
#define RADPAIR_VERSION "0.0.0"
#endif

namespace radpair::io {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out_dir = ".";
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool svg = false;
  std::string input;
};

class Session {
 public:
  Session(std::string command, const Options& opt, std::ostream& out, std::ostream& err)
      : command_(std::move(command)), opt_(opt), out_(out), err_(err) {}

  int run();

 private:
  void load();
  void simulate_mfe();
  void simulate_odmr();
  void simulate_map();
  void compare_mutant();
  void emulate_protocol();
  void analyze_contrast();
  void analyze_peaks();
  void fit_gfactor();
  void fit_bhalf();

  std::vector<std::string> header() const;
  void write_table(const std::string& name, CsvTable table,
                   const std::map<std::string, std::string>& extra = {});
  void write_svg(const std::string& name, const std::string& svg);
  CsvTable input_table() const;

  std::string command_;
  Options opt_;
  std::ostream& out_;
  std::ostream& err_;
  RunConfig cfg_;
  std::string hash_;
  fs::path dir_;
};

unsigned threads_from_env() {
  const char* env = std::getenv("RADPAIR_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0) throw InvalidArgument("RADPAIR_THREADS must be a non-negative integer");
  return static_cast<unsigned>(v);
}

void Session::load() {
  json user = json::object();
  if (!opt_.config.empty()) {
    std::ifstream in(opt_.config, std::ios::binary);
    if (!in) throw InvalidArgument("cannot read config file " + opt_.config);
    std::ostringstream buf;
    buf << in.rdbuf();
    user = parse_json_text(buf.str());
    if (!user.is_object()) throw ValidationError("", "config root must be an object");
  }
  if (!opt_.preset.empty()) user["preset"] = opt_.preset;
  cfg_ = resolve_config(user);
  if (opt_.seed) {
    cfg_.seed = *opt_.seed;
    cfg_.resolved["seed"] = *opt_.seed;
  }
  if (opt_.threads) {
    cfg_.threads = *opt_.threads;
    cfg_.resolved["threads"] = *opt_.threads;
  }
  unsigned threads = cfg_.threads;
  if (threads == 0) threads = threads_from_env();
  threads = resolve_threads(threads);
  cfg_.model.threads = threads;
  cfg_.mutant.mutant.threads = threads;
  cfg_.emulate.seed = cfg_.seed;
  hash_ = config_hash(cfg_);

  dir_ = opt_.out_dir;
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw InvalidArgument("cannot create output directory " + dir_.string());
}

std::vector<std::string> Session::header() const {
  return {std::string("radpair ") + RADPAIR_VERSION, "command: " + command_,
          "config_hash: " + hash_, "seed: " + std::to_string(cfg_.seed)};
}

void Session::write_table(const std::string& name, CsvTable table,
                          const std::map<std::string, std::string>& extra) {
  std::vector<std::string> meta = header();
  for (const auto& [k, v] : extra) meta.push_back(k + ": " + v);
  table.metadata = std::move(meta);
  write_file_atomic(dir_ / name, to_csv(table));
  out_ << "wrote " << (dir_ / name).string() << "\n";
}

void Session::write_svg(const std::string& name, const std::string& svg) {
  write_file_atomic(dir_ / name, svg);
  out_ << "wrote " << (dir_ / name).string() << "\n";
}

CsvTable Session::input_table() const {
  if (opt_.input.empty()) throw InvalidArgument(command_ + " needs an input CSV");
  return read_csv(opt_.input);
}

void Session::simulate_mfe() {
  const SweepResult r = mfe_sweep(cfg_.model, cfg_.mfe.b_values);
  write_table("mfe.csv", sweep_table(r), r.metadata);
  if (opt_.svg) write_svg("mfe.svg", emit_svg_plot(r));
  out_ << "mfe amplitude " << format_number(mfe_amplitude(r)) << "\n";
}

void Session::simulate_odmr() {
  const auto& f = cfg_.model.fields;
  const SweepResult r = odmr_sweep(cfg_.model, f.b0, f.rf_b1, cfg_.odmr.frequencies());
  write_table("odmr.csv", sweep_table(r), r.metadata);
  if (opt_.svg) write_svg("odmr.svg", emit_svg_plot(r));
  const Spectrum s = polarity_normalized(r.spectrum());
  out_ << "peak contrast " << format_number(peak_contrast(r)) << ", centroid "
       << format_number(spectral_centroid(s, cfg_.analyze.centroid_threshold)) << " MHz\n";
}

void Session::simulate_map() {
  const auto rows =
      field_frequency_map(cfg_.model, cfg_.map.b0_values, cfg_.map.freq_span, cfg_.map.freq_step);
  std::map<std::string, std::string> meta = rows.front().metadata;
  meta.erase("b0_mT");
  meta.erase("phi_singlet_off");
  meta.erase("rwa_invalid_points");
  write_table("map.csv", map_table(rows), meta);
  std::vector<std::pair<double, double>> points;
  for (const auto& r : rows) {
    const double b0 = std::strtod(r.metadata.at("b0_mT").c_str(), nullptr);
    const Spectrum s = polarity_normalized(r.spectrum());
    points.emplace_back(b0, spectral_centroid(s, cfg_.analyze.centroid_threshold));
    if (opt_.svg) write_svg("map_" + format_number(b0) + "mT.svg", emit_svg_plot(r));
  }
  const GFactorFit fit = line_fit_g_factor(points);
  out_ << "centroid line slope " << format_number(fit.slope) << " MHz/mT, g "
       << format_number(fit.g) << "\n";
}

void Session::compare_mutant() {
  const MutantComparison cmp = mutant_comparison(cfg_.model, cfg_.mutant.mutant, cfg_.mfe.b_values,
                                                 cfg_.odmr.frequencies());
  write_table("wt_mfe.csv", sweep_table(cmp.wild_type.mfe), cmp.wild_type.mfe.metadata);
  write_table("wt_odmr.csv", sweep_table(cmp.wild_type.odmr), cmp.wild_type.odmr.metadata);
  write_table("mutant_mfe.csv", sweep_table(cmp.mutant.mfe), cmp.mutant.mfe.metadata);
  write_table("mutant_odmr.csv", sweep_table(cmp.mutant.odmr), cmp.mutant.odmr.metadata);
  CsvTable summary;
  summary.columns = {"is_mutant", "mfe_amplitude", "peak_contrast"};
  summary.rows.push_back({0.0, cmp.wild_type.mfe_amplitude, cmp.wild_type.peak_contrast});
  summary.rows.push_back({1.0, cmp.mutant.mfe_amplitude, cmp.mutant.peak_contrast});
  write_table("mutant_summary.csv", summary,
              {{"ordering_holds", cmp.ordering_holds ? "true" : "false"}});
  if (opt_.svg) {
    write_svg("wt_odmr.svg", emit_svg_plot(cmp.wild_type.odmr));
    write_svg("mutant_odmr.svg", emit_svg_plot(cmp.mutant.odmr));
  }
  out_ << "wild type: mfe " << format_number(cmp.wild_type.mfe_amplitude) << ", contrast "
       << format_number(cmp.wild_type.peak_contrast) << "\nmutant: mfe "
       << format_number(cmp.mutant.mfe_amplitude) << ", contrast "
       << format_number(cmp.mutant.peak_contrast) << "\nordering "
       << (cmp.ordering_holds ? "holds" : "violated") << "\n";
}

void Session::emulate_protocol() {
  const ProtocolTrace tr = protocol_emulator(cfg_.emulate);
  write_table("trace.csv", trace_table(tr),
              {{"bleach_slope_true", format_number(tr.bleach_slope_true)},
               {"mode", cfg_.emulate.mode == EmulatorMode::Odmr ? "odmr" : "mfe"},
               {"true_contrast", format_number(cfg_.emulate.true_contrast)}});
  if (opt_.svg) {
    write_svg("trace.svg",
              svg_line_plot(tr.frame_times, tr.intensities, "time (s)", "intensity", "trace"));
  }
}

void Session::analyze_contrast() {
  const ProtocolTrace tr = trace_from_table(input_table());
  const ContrastAnalysis a = radpair::analyze_contrast(tr, cfg_.analyze.fit_range, cfg_.analyze.baseline);
  CsvTable cycles;
  cycles.columns = {"time_s", "ratio"};
  for (std::size_t i = 0; i < a.contrast.ratios.size(); ++i) {
    cycles.rows.push_back({a.contrast.cycle_times[i], a.contrast.ratios[i]});
  }
  write_table("contrast_cycles.csv", cycles);
  CsvTable summary;
  summary.columns = {"contrast", "sem", "mean_ratio", "baseline", "bleach_slope",
                     "bleach_slope_sigma", "bleach_intercept"};
  summary.rows.push_back({a.contrast.contrast, a.contrast.sem, a.contrast.mean_ratio,
                          a.contrast.baseline, a.bleach.slope, a.bleach.slope_sigma,
                          a.bleach.intercept});
  write_table("contrast.csv", summary);
  out_ << "contrast " << format_number(a.contrast.contrast) << " +/- "
       << format_number(a.contrast.sem) << ", bleach slope " << format_number(a.bleach.slope)
       << " +/- " << format_number(a.bleach.slope_sigma) << " /s\n";
}

// Splits an ODMR or map table into spectra keyed by field (NaN when unknown).
std::vector<std::pair<double, Spectrum>> spectra_of(const CsvTable& t) {
  const auto freq = t.values("freq_MHz");
  const auto contrast = t.values("contrast");
  std::vector<std::pair<double, Spectrum>> out;
  if (t.has_column("b0_mT")) {
    const auto b0 = t.values("b0_mT");
    for (std::size_t i = 0; i < freq.size(); ++i) {
      if (out.empty() || out.back().first != b0[i]) out.emplace_back(b0[i], Spectrum{});
      out.back().second.frequency.push_back(freq[i]);
      out.back().second.contrast.push_back(contrast[i]);
    }
    return out;
  }
  double b0 = std::nan("");
  for (const auto& m : t.metadata) {
    if (m.rfind("b0_mT: ", 0) == 0) b0 = std::strtod(m.c_str() + 7, nullptr);
  }
  out.emplace_back(b0, Spectrum{freq, contrast, {}});
  return out;
}

void Session::analyze_peaks() {
  const CsvTable in = input_table();
  CsvTable peaks;
  peaks.columns = {"b0_mT", "center_MHz", "height", "fwhm_MHz", "prominence"};
  CsvTable centroids;
  centroids.columns = {"b0_mT", "centroid_MHz"};
  for (auto& [b0, raw] : spectra_of(in)) {
    validate(raw);
    Spectrum s = cfg_.analyze.subtract_baseline ? subtract_baseline(raw) : raw;
    s = polarity_normalized(s);
    double prom = cfg_.analyze.min_prominence;
    if (prom == 0.0) {
      double top = 0.0;
      for (double c : s.contrast) top = std::max(top, c);
      prom = top > 0.0 ? 0.05 * top : 1e-300;
    }
    const PeakReport r = peak_find(s, prom, cfg_.analyze.refinement);
    for (std::size_t i = 0; i < r.size(); ++i) {
      peaks.rows.push_back({b0, r.centers[i], r.heights[i], r.fwhm[i], r.prominences[i]});
    }
    const double c = spectral_centroid(s, cfg_.analyze.centroid_threshold);
    centroids.rows.push_back({b0, c});
    out_ << "field " << format_number(b0) << " mT: " << r.size() << " peaks, centroid "
         << format_number(c) << " MHz\n";
  }
  write_table("peaks.csv", peaks);
  write_table("centroids.csv", centroids);
}

void Session::fit_gfactor() {
  const CsvTable in = input_table();
  std::vector<std::pair<double, double>> points;
  if (in.has_column("b0_mT") && (in.has_column("center_MHz") || in.has_column("centroid_MHz"))) {
    const auto b0 = in.values("b0_mT");
    const auto c = in.values(in.has_column("center_MHz") ? "center_MHz" : "centroid_MHz");
    for (std::size_t i = 0; i < b0.size(); ++i) points.emplace_back(b0[i], c[i]);
  } else {
    for (const auto& [b0, s] : spectra_of(in)) {
      points.emplace_back(b0, spectral_centroid(polarity_normalized(s),
                                                cfg_.analyze.centroid_threshold));
    }
  }
  const GFactorFit fit = line_fit_g_factor(points, cfg_.analyze.free_intercept);
  CsvTable t;
  t.columns = {"g", "slope_MHz_per_mT", "intercept_MHz", "r_squared"};
  t.rows.push_back({fit.g, fit.slope, fit.intercept, fit.r_squared});
  write_table("gfactor.csv", t);
  out_ << "g " << format_number(fit.g) << ", slope " << format_number(fit.slope)
       << " MHz/mT, r2 " << format_number(fit.r_squared) << "\n";
}

void Session::fit_bhalf() {
  const CsvTable in = input_table();
  const auto b = in.values("b0_mT");
  std::vector<double> amp;
  if (in.has_column("amplitude")) {
    amp = in.values("amplitude");
  } else {
    const auto f = in.values("fluorescence");
    if (f.empty() || f.front() == 0.0) throw DivisionDomain("reference fluorescence is zero");
    if (b.front() != 0.0) err_ << "warning: first field is not 0 mT; used as reference\n";
    for (double v : f) amp.push_back(v / f.front() - 1.0);
  }
  std::vector<std::pair<double, double>> curve;
  for (std::size_t i = 0; i < b.size(); ++i) curve.emplace_back(b[i], amp[i]);
  const BHalfFit fit = b_half_fit(curve);
  if (fit.warning) err_ << "warning: " << fit.message << "\n";
  CsvTable t;
  t.columns = {"amplitude", "b_half_mT", "residual_norm", "warning"};
  t.rows.push_back({fit.amplitude, fit.b_half, fit.residual_norm, fit.warning ? 1.0 : 0.0});
  write_table("bhalf.csv", t);
  out_ << "B1/2 " << format_number(fit.b_half) << " mT, amplitude " << format_number(fit.amplitude)
       << "\n";
}

int Session::run() {
  load();
  if (command_ == "simulate-mfe") {
    simulate_mfe();
  } else if (command_ == "simulate-odmr") {
    simulate_odmr();
  } else if (command_ == "simulate-map") {
    simulate_map();
  } else if (command_ == "compare-mutant") {
    compare_mutant();
  } else if (command_ == "emulate-protocol") {
    emulate_protocol();
  } else if (command_ == "analyze-contrast") {
    analyze_contrast();
  } else if (command_ == "analyze-peaks") {
    analyze_peaks();
  } else if (command_ == "fit-gfactor") {
    fit_gfactor();
  } else if (command_ == "fit-bhalf") {
    fit_bhalf();
  }
  write_file_atomic(dir_ / "resolved_config.json", serialize(cfg_).dump(2) + "\n");
  return 0;
}

struct Command {
  const char* name;
  const char* help;
  bool takes_input;
};

constexpr Command kCommands[] = {
    {"simulate-mfe", "static-field sweep of singlet yield and fluorescence", false},
    {"simulate-odmr", "RF frequency sweep at fixed field", false},
    {"simulate-map", "ODMR sweeps over a list of fields", false},
    {"compare-mutant", "wild type against mutant: MFE amplitude and peak contrast", false},
    {"emulate-protocol", "synthetic on/off fluorescence trace", false},
    {"analyze-contrast", "bleach-corrected contrast from a trace CSV", true},
    {"analyze-peaks", "peaks and centroids of an ODMR or map CSV", true},
    {"fit-gfactor", "line fit of resonance centre against field", true},
    {"fit-bhalf", "half-saturation field of an MFE curve", true},
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radical-pair spin dynamics and ODMR simulator"};
  app.set_version_flag("--version", RADPAIR_VERSION);
  app.require_subcommand(1);
  Options opt;
  for (const auto& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", opt.config, "JSON run configuration");
    sub->add_option("--out-dir", opt.out_dir, "output directory")->capture_default_str();
    sub->add_option("--preset", opt.preset, "named preset applied under the config");
    sub->add_option("--seed", opt.seed, "random seed");
    sub->add_option("--threads", opt.threads, "worker threads (0: auto)");
    sub->add_flag("--svg", opt.svg, "also write SVG plots");
    if (c.takes_input) sub->add_option("input", opt.input, "input CSV")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return Session(command, opt, out, err).run();
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace radpair::io
