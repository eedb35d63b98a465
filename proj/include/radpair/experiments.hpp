#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "radpair/analysis.hpp"
#include "radpair/dynamics.hpp"
#include "radpair/hamiltonian.hpp"
#include "radpair/photocycle.hpp"
#include "radpair/trace.hpp"

namespace radpair {

struct Numerics {
  double dt = 0.0;  // us, lab-frame step; 0 picks 1 / (32 nu_RF)
  double eps_trunc = kDefaultTruncation;
  bool rwa_enabled = true;
  // 0 disables orientation averaging; otherwise >= 50 spherical Fibonacci
  // field directions.
  std::size_t orientation_grid = 0;
  bool allow_negative_fields = false;
};

// Analytic g-marker line (an isolated S = 1/2 defect with spin-dependent
// fluorescence), used as the field calibration reference. The line is the
// Bloch steady-state saturation profile.
struct MarkerLine {
  double g = kFreeElectronG;
  double t1 = 1.0;   // us
  double t2 = 0.1;   // us
  double max_contrast = 0.01;
};

struct ModelConfig {
  SpinSystem system;
  KineticModel kinetics;
  InitialStateKind initial_state = InitialStateKind::SingletBorn;
  PhotocycleModel photocycle;
  FieldProtocol fields;
  Numerics numerics;
  std::optional<MarkerLine> marker;
  unsigned threads = 1;
};

void validate(const ModelConfig& model);

struct SweepResult {
  std::string axis_name;
  std::vector<double> axis_values;
  std::vector<double> phi_singlet;
  std::vector<double> fluorescence;
  std::vector<double> contrast;  // ODMR only
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return axis_values.size(); }
  Spectrum spectrum() const;
};

// Singlet yield for one field protocol, orientation-averaged when enabled.
// With RF enabled the rotating-frame or lab-frame path is chosen by
// numerics.rwa_enabled.
YieldResult evaluate_yield(const ModelConfig& model, const FieldProtocol& protocol);

// Uniform points on the unit sphere (spherical Fibonacci lattice).
std::vector<Eigen::Vector3d> fibonacci_sphere(std::size_t n);

SweepResult mfe_sweep(const ModelConfig& model, const std::vector<double>& b_values);

// RF is on for the whole radical-pair lifetime at every frequency; contrast
// is taken against the RF-off yield at the same b0.
SweepResult odmr_sweep(const ModelConfig& model, double b0, double b1,
                       const std::vector<double>& freq_values);

std::vector<double> frequency_grid(double f_min, double f_max, double step);

// One ODMR sweep per field, each spanning freq_span centred on the free
// electron line g * muB/h * b0.
std::vector<SweepResult> field_frequency_map(const ModelConfig& model,
                                             const std::vector<double>& b0_values,
                                             double freq_span = 400.0, double freq_step = 2.0);

// max |F(B)/F(B_first) - 1| over an MFE curve.
double mfe_amplitude(const SweepResult& mfe);
double peak_contrast(const SweepResult& odmr);

struct MutantArm {
  SweepResult mfe;
  SweepResult odmr;
  double mfe_amplitude = 0.0;
  double peak_contrast = 0.0;
};

struct MutantComparison {
  MutantArm wild_type;
  MutantArm mutant;
  bool ordering_holds = false;  // WT > mutant for both observables
};

// Both models must share b0 (fields.b0), which is used for the ODMR arm.
MutantComparison mutant_comparison(const ModelConfig& wild_type, const ModelConfig& mutant,
                                   const std::vector<double>& b_values,
                                   const std::vector<double>& freq_values);

// ---- protocol emulator ---------------------------------------------------

enum class NoiseModel { None, Shot, Gaussian };

struct NoiseSpec {
  NoiseModel model = NoiseModel::None;
  double scale = 1e4;  // shot: counts per intensity unit
  double sigma = 0.0;  // gaussian: absolute standard deviation
};

enum class EmulatorMode { Odmr, Mfe };

struct EmulatorTiming {
  double rf_window_s = 1.0;  // RF-on exposure
  double recovery_s = 9.0;   // dark time after every exposure
  double exposure_s = 1.0;   // reference exposure
  double mfe_frame_s = 0.5;  // MFE mode: back-to-back frames, field alternating
};

struct EmulatorConfig {
  EmulatorMode mode = EmulatorMode::Odmr;
  EmulatorTiming timing;
  double true_contrast = 0.0;
  double baseline = 1.0;
  double bleach_slope = 0.0;  // units / s
  NoiseSpec noise;
  std::size_t n_cycles = 1;
  std::uint64_t seed = 0;
};

// baseline (1 + contrast * on) + bleach_slope * t + noise, frames at the
// exposure midpoints. ODMR cycles: RF-on exposure, recovery, reference
// exposure, recovery.
ProtocolTrace protocol_emulator(const EmulatorConfig& config);

}  // namespace radpair
