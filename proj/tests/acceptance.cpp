// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cli_runner.hpp"
#include "radpair/config.hpp"
#include "radpair/csv.hpp"
#include "radpair/experiments.hpp"
#include "radpair/parallel.hpp"
#include "radpair/reference_oracle.hpp"
#include "test_util.hpp"

using namespace radpair;
using namespace radpair::io;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ModelConfig preset_model(const std::string& name) {
  ModelConfig m = resolve_config(json{{"preset", name}}).model;
  m.threads = resolve_threads(0);
  return m;
}

double centroid_of(const SweepResult& r) {
  return spectral_centroid(polarity_normalized(r.spectrum()), 0.1);
}

double max_abs_contrast(const SweepResult& r) {
  double m = 0.0;
  for (double c : r.contrast) m = std::max(m, std::abs(c));
  return m;
}

PeakReport peaks_of(const SweepResult& r) {
  const Spectrum s = polarity_normalized(r.spectrum());
  const double top = *std::max_element(s.contrast.begin(), s.contrast.end());
  return peak_find(s, 0.05 * top);
}

Outcome resonance_position() {
  const ModelConfig m = preset_model("dmcry_wt_proxy");
  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult r = odmr_sweep(m, 43.2, m.fields.rf_b1, frequency_grid(1000.0, 1400.0, 2.0));
  const double elapsed = seconds_since(t0);
  const double c = centroid_of(r);
  const PeakReport p = peaks_of(r);
  Outcome o;
  o.pass = std::abs(c - 1210.7) <= 5.0 && elapsed < 60.0 && r.metadata.at("path") == "rotating_frame";
  o.detail = "centroid " + num(c) + " MHz, " + std::to_string(p.size()) + " peaks, sweep " +
             num(elapsed) + " s";
  return o;
}

Outcome field_tracking() {
  const std::vector<double> fields{43.2, 49.9, 56.0, 62.0, 69.2};
  auto slope_of = [&](const ModelConfig& m) {
    std::vector<std::pair<double, double>> pts;
    const auto rows = field_frequency_map(m, fields, 400.0, 2.0);
    for (std::size_t i = 0; i < rows.size(); ++i) pts.emplace_back(fields[i], centroid_of(rows[i]));
    return line_fit_g_factor(pts);
  };
  const GFactorFit rp = slope_of(preset_model("dmcry_wt_proxy"));
  const GFactorFit marker = slope_of(preset_model("bnnt_marker"));
  const double target = 28.0249;
  Outcome o;
  o.pass = std::abs(rp.slope / target - 1.0) < 0.01 && std::abs(marker.slope / target - 1.0) < 0.01 &&
           std::abs(rp.slope / marker.slope - 1.0) < 0.01 && std::abs(rp.g - 2.0023) <= 0.02;
  o.detail = "slope " + num(rp.slope) + " MHz/mT (g " + num(rp.g) + "), marker slope " +
             num(marker.slope) + " MHz/mT";
  return o;
}

Outcome hyperfine_splitting() {
  const ModelConfig m = preset_model("toy_1proton");
  const SweepResult r = odmr_sweep(m, 43.2, m.fields.rf_b1, frequency_grid(1000.0, 1400.0, 2.0));
  const PeakReport p = peaks_of(r);
  Outcome o;
  if (p.size() < 2) {
    o.detail = std::to_string(p.size()) + " peaks found";
    return o;
  }
  const double split = p.centers.back() - p.centers.front();
  o.pass = std::abs(split - 50.0) <= 5.0;
  o.detail = "outer pair " + num(p.centers.front()) + " / " + num(p.centers.back()) +
             " MHz, splitting " + num(split) + " MHz";
  return o;
}

Outcome mutant_ordering() {
  const RunConfig cfg = resolve_config(json{{"preset", "dmcry_wt_proxy"}});
  ModelConfig wt = cfg.model;
  ModelConfig mut = cfg.mutant.mutant;
  wt.threads = mut.threads = resolve_threads(0);
  const bool setup = mut.photocycle.triplet_product_lifetime == 10.0 &&
                     wt.photocycle.triplet_product_lifetime == 1000.0 &&
                     mut.kinetics.k_singlet == 10.0 * wt.kinetics.k_singlet &&
                     mut.kinetics.k_triplet == 10.0 * wt.kinetics.k_triplet;
  const MutantComparison c = mutant_comparison(wt, mut, cfg.mfe.b_values, cfg.odmr.frequencies());
  const double reduction = 1.0 - c.mutant.peak_contrast / c.wild_type.peak_contrast;
  Outcome o;
  o.pass = setup && c.ordering_holds && reduction >= 0.5;
  o.detail = "contrast " + num(c.wild_type.peak_contrast) + " -> " + num(c.mutant.peak_contrast) +
             " (-" + num(100.0 * reduction) + "%), MFE " + num(c.wild_type.mfe_amplitude) +
             " -> " + num(c.mutant.mfe_amplitude);
  return o;
}

Outcome null_controls() {
  const auto freqs = frequency_grid(1150.0, 1270.0, 2.0);
  double worst = 0.0;

  const ModelConfig toy = preset_model("toy_1proton");
  worst = std::max(worst, max_abs_contrast(odmr_sweep(toy, 43.2, 0.0, freqs)));

  ModelConfig bare = toy;
  bare.system = SpinSystem{};
  for (auto kind : {InitialStateKind::SingletBorn, InitialStateKind::TripletBorn}) {
    bare.initial_state = kind;
    worst = std::max(worst, max_abs_contrast(odmr_sweep(bare, 43.2, 0.2, freqs)));
  }

  ModelConfig no_product = toy;
  no_product.photocycle.triplet_product_lifetime = 0.0;
  worst = std::max(worst, max_abs_contrast(odmr_sweep(no_product, 43.2, 0.2, freqs)));

  bare.initial_state = InitialStateKind::SingletBorn;
  std::vector<double> fields;
  for (int i = 0; i <= 100; ++i) fields.push_back(i);
  double phi_dev = 0.0;
  for (double phi : mfe_sweep(bare, fields).phi_singlet) phi_dev = std::max(phi_dev, std::abs(phi - 1.0));

  Outcome o;
  o.pass = worst < 1e-9 && phi_dev < 1e-9;
  o.detail = "max |contrast| " + num(worst) + ", max |phi_S - 1| " + num(phi_dev);
  return o;
}

Outcome oracle_equivalence() {
  // static: one proton, t = 10 / kS
  const SpinSystem s = testutil::one_proton(10.0);
  const DensityMatrix rho0 = initial_state(s);
  FieldProtocol p;
  p.b0 = 1.0;
  const KineticModel k{1.0, 1.0};
  const auto ref = oracle::reference_oracle(rho0, s, p, k, 2e-4, 10.0, 50000);
  const Liouvillian gen = haberkorn_step_generator(static_hamiltonian(s, 1.0), s, k);
  const double d_static =
      max_abs(propagate_static(rho0, gen, std::vector<double>{10.0})[0].matrix - ref.states.back().matrix);

  // driven: bare electron Rabi over 3 periods
  SpinSystem e;
  e.electron_b = electron(2.5);
  FieldProtocol rf;
  rf.b0 = 43.2;
  rf.rf_enabled = true;
  rf.rf_b1 = 0.1;
  rf.rf_frequency = electron_larmor(2.0023, 43.2);
  DensityMatrix up;
  up.matrix = Operator::Zero(4, 4);
  up.matrix(0, 0) = 1.0;
  const double rabi = electron_larmor(2.0023, 0.5 * rf.rf_b1);
  const double h = 1.0 / (128.0 * rf.rf_frequency);
  const std::size_t stride = 256;
  const auto n = static_cast<std::size_t>(std::ceil(3.0 / rabi / h / stride)) * stride;
  const double t_end = static_cast<double>(n) * h;
  const auto fast = propagate_driven(up, e, rf, KineticModel{0.0, 0.0}, h, t_end, stride);
  const auto slow = oracle::reference_oracle(up, e, rf, KineticModel{0.0, 0.0}, h / 8, t_end, stride * 8);
  double d_driven = fast.size() == slow.states.size() ? 0.0 : 1.0;
  for (std::size_t i = 0; i < std::min(fast.size(), slow.states.size()); ++i) {
    d_driven = std::max(d_driven, max_abs(fast[i].matrix - slow.states[i].matrix));
  }

  // resolvent vs time domain, random systems plus a full 64-dim one
  std::mt19937_64 rng(2024);
  std::vector<SpinSystem> systems;
  for (int i = 0; i < 12; ++i) systems.push_back(testutil::random_system(rng));
  std::vector<Nucleus> four;
  for (int i = 0; i < 4; ++i) four.push_back(isotropic_nucleus(proton(), i % 2 ? Radical::B : Radical::A, 5.0 + 7.0 * i));
  systems.push_back(testutil::pair_with(four, -4.0, 1.0));
  double d_yield = 0.0;
  std::size_t max_dim = 0;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    const auto& sys = systems[i];
    max_dim = std::max(max_dim, hilbert_dim(sys));
    const Liouvillian g = haberkorn_step_generator(static_hamiltonian(sys, 0.7 + 4.0 * static_cast<double>(i)),
                                                   sys, KineticModel{0.6, 1.4});
    const DensityMatrix r0 = initial_state(sys);
    d_yield = std::max(d_yield, std::abs(singlet_yield_resolvent(r0, g).phi_singlet -
                                         singlet_yield_time_domain(r0, g, 1e-8).phi_singlet));
  }

  Outcome o;
  o.pass = d_static < 1e-6 && d_driven < 1e-6 && d_yield < 1e-6;
  o.detail = "static " + num(d_static) + ", driven " + num(d_driven) + ", yield paths " + num(d_yield) +
             " (dims up to " + std::to_string(max_dim) + ")";
  return o;
}

Outcome conservation() {
  std::mt19937_64 rng(77);
  double trace_drift = 0.0, trace_rise = 0.0, herm = 0.0, min_eig = 0.0, closure = 0.0;
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(0.1 * i);
  for (int i = 0; i < 20; ++i) {
    const SpinSystem s = testutil::random_system(rng);
    const Operator h = static_hamiltonian(s, 0.5 + 2.5 * i);
    const DensityMatrix r0 = initial_state(s, i % 2 ? InitialStateKind::TripletBorn : InitialStateKind::SingletBorn);

    for (const auto& r : propagate_static(r0, haberkorn_step_generator(h, s, KineticModel{0.0, 0.0}), grid)) {
      trace_drift = std::max(trace_drift, std::abs(r.matrix.trace().real() - 1.0));
    }
    const Liouvillian gen = haberkorn_step_generator(h, s, KineticModel{0.3 + 0.1 * i, 1.2});
    double prev = 1.0;
    for (const auto& r : propagate_static(r0, gen, grid)) {
      const double t = r.matrix.trace().real();
      trace_rise = std::max(trace_rise, t - prev);
      prev = t;
      herm = std::max(herm, hermiticity_defect(r.matrix));
      Eigen::SelfAdjointEigenSolver<Operator> eig(0.5 * (r.matrix + r.matrix.adjoint()));
      min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
    }
    const YieldResult y = singlet_yield(r0, gen);
    closure = std::max(closure, std::abs(y.phi_singlet + y.phi_triplet + y.truncation_residual - 1.0));
  }
  Outcome o;
  o.pass = trace_drift < 1e-10 && trace_rise <= 1e-12 && herm < 1e-10 && min_eig > -1e-9 && closure < 1e-6;
  o.detail = "trace drift " + num(trace_drift) + ", max trace rise " + num(trace_rise) + ", hermiticity " +
             num(herm) + ", min eigenvalue " + num(min_eig) + ", yield closure " + num(closure);
  return o;
}

Outcome analysis_round_trip() {
  EmulatorConfig c = resolve_config(json::object()).emulate;
  c.noise.model = NoiseModel::Shot;
  const double period = c.timing.rf_window_s + 2.0 * c.timing.recovery_s + c.timing.exposure_s;
  int within = 0;
  double slope_sum = 0.0, slope_sigma_sum = 0.0;
  bool seed0_slope = false;
  const int runs = 100;
  for (int seed = 0; seed < runs; ++seed) {
    c.seed = static_cast<std::uint64_t>(seed);
    const ProtocolTrace tr = protocol_emulator(c);
    const ContrastAnalysis a = analyze_contrast(tr);
    // shot noise propagated through each on/off ratio, plus the common
    // detrending error over the on/off separation
    double var = 0.0;
    for (std::size_t i = 0; i + 1 < tr.size(); i += 2) {
      const double on = c.baseline * (1.0 + c.true_contrast) + c.bleach_slope * tr.frame_times[i];
      const double off = c.baseline + c.bleach_slope * tr.frame_times[i + 1];
      const double r = on / off;
      var += r * r * (1.0 / (on * c.noise.scale) + 1.0 / (off * c.noise.scale));
    }
    const double n = static_cast<double>(tr.size() / 2);
    const double lag = tr.frame_times[1] - tr.frame_times[0];
    const double sigma = std::sqrt(var / (n * n) + std::pow(lag * a.bleach.slope_sigma, 2));
    if (std::abs(a.contrast.contrast - c.true_contrast) <= 3.0 * sigma) ++within;
    slope_sum += a.bleach.slope;
    slope_sigma_sum += a.bleach.slope_sigma;
    if (seed == 0) seed0_slope = std::abs(a.bleach.slope - c.bleach_slope) <= 2.0 * a.bleach.slope_sigma;
  }
  const double mean_slope = slope_sum / runs;
  const double pooled_sigma = slope_sigma_sum / runs / std::sqrt(static_cast<double>(runs));
  const bool pooled = std::abs(mean_slope - c.bleach_slope) <= 2.0 * pooled_sigma;
  Outcome o;
  o.pass = within >= 95 && seed0_slope && pooled;
  o.detail = std::to_string(within) + "/100 within 3 sigma, mean bleach slope " + num(mean_slope) +
             " (true " + num(c.bleach_slope) + ", pooled 2 sigma " + num(2.0 * pooled_sigma) +
             "), cycle " + num(period) + " s";
  return o;
}

Outcome rwa_validity() {
  ModelConfig m = preset_model("toy_1proton");
  m.initial_state = InitialStateKind::TripletBorn;
  const auto freqs = frequency_grid(1150.0, 1270.0, 1.0);
  double worst_shift = 0.0, worst_height = 0.0;
  bool shape = true;
  for (double b1 : {0.05, 0.1, 0.2}) {
    m.numerics.rwa_enabled = true;
    const SweepResult rot = odmr_sweep(m, 43.2, b1, freqs);
    m.numerics.rwa_enabled = false;
    const SweepResult lab = odmr_sweep(m, 43.2, b1, freqs);
    const PeakReport a = peaks_of(rot);
    const PeakReport b = peaks_of(lab);
    if (a.size() != b.size() || a.size() == 0) {
      shape = false;
      continue;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      worst_shift = std::max(worst_shift, std::abs(a.centers[i] - b.centers[i]));
      worst_height = std::max(worst_height, std::abs(a.heights[i] / b.heights[i] - 1.0));
    }
  }
  Outcome o;
  o.pass = shape && worst_shift < 2.0 && worst_height < 0.05;
  o.detail = std::string(shape ? "" : "peak count mismatch; ") + "max centre shift " + num(worst_shift) +
             " MHz, max height deviation " + num(100.0 * worst_height) + "% (b1 0.05-0.2 mT)";
  return o;
}

Outcome determinism() {
  testutil::TempDir dir;
  testutil::spit(dir.path() / "run.json", R"({
    "preset": "toy_1proton",
    "experiment": {
      "mfe": {"b_min": 0.0, "b_max": 10.0, "b_step": 0.5},
      "odmr": {"freq_min": 1150.0, "freq_max": 1270.0, "freq_step": 2.0},
      "map": {"b0_values": [43.2, 56.0], "freq_span": 120.0, "freq_step": 2.0},
      "mutant": {"mutant": {"kinetics": {"k_singlet": 10.0, "k_triplet": 10.0},
                            "photocycle": {"triplet_product_lifetime": 10.0}}},
      "emulate": {"n_cycles": 20}
    },
    "seed": 11
  })");
  const std::string cfg = dir / "run.json";
  struct Step {
    std::vector<std::string> args;  // without --out-dir
    std::vector<std::string> csv;
  };
  auto in = [&](int rep, const std::string& rel) { return dir / ("r" + std::to_string(rep) + "/" + rel); };
  std::vector<std::string> compared;
  std::string failure;
  std::vector<std::string> first;
  for (int rep = 0; rep < 2; ++rep) {
    const std::vector<Step> steps = {
        {{"simulate-mfe", "--config", cfg}, {"mfe.csv"}},
        {{"simulate-odmr", "--config", cfg}, {"odmr.csv"}},
        {{"simulate-map", "--config", cfg}, {"map.csv"}},
        {{"compare-mutant", "--config", cfg},
         {"wt_mfe.csv", "wt_odmr.csv", "mutant_mfe.csv", "mutant_odmr.csv", "mutant_summary.csv"}},
        {{"emulate-protocol", "--config", cfg}, {"trace.csv"}},
        {{"analyze-contrast", in(rep, "emulate-protocol/trace.csv"), "--config", cfg},
         {"contrast_cycles.csv", "contrast.csv"}},
        {{"analyze-peaks", in(rep, "simulate-map/map.csv"), "--config", cfg}, {"peaks.csv", "centroids.csv"}},
        {{"fit-gfactor", in(rep, "simulate-map/map.csv"), "--config", cfg}, {"gfactor.csv"}},
        {{"fit-bhalf", in(rep, "simulate-mfe/mfe.csv"), "--config", cfg}, {"bhalf.csv"}},
    };
    std::vector<std::string> contents;
    for (const auto& st : steps) {
      auto args = st.args;
      args.push_back("--out-dir");
      args.push_back(in(rep, st.args[0]));
      const auto r = testutil::run_cli(args);
      if (r.code != 0) {
        failure = st.args[0] + " exited " + std::to_string(r.code) + ": " + r.err;
        break;
      }
      for (const auto& f : st.csv) {
        contents.push_back(testutil::slurp(in(rep, st.args[0] + "/" + f)));
        if (rep == 0) compared.push_back(st.args[0] + "/" + f);
      }
    }
    if (!failure.empty()) break;
    if (rep == 0) {
      first = contents;
    } else {
      for (std::size_t i = 0; i < contents.size(); ++i) {
        if (contents[i] != first[i]) failure = compared[i] + " differs between runs";
      }
    }
  }
  Outcome o;
  o.pass = failure.empty() && compared.size() == 15;
  o.detail = failure.empty() ? std::to_string(compared.size()) + " CSV files byte-identical across 9 subcommands"
                             : failure;
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"resonance position", resonance_position},
      {"field tracking", field_tracking},
      {"hyperfine splitting", hyperfine_splitting},
      {"mutant ordering", mutant_ordering},
      {"null controls", null_controls},
      {"oracle equivalence", oracle_equivalence},
      {"conservation", conservation},
      {"analysis round trip", analysis_round_trip},
      {"RWA validity", rwa_validity},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << " [" << num(seconds_since(t0)) << " s]" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
