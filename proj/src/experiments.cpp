#include "radpair/experiments.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "radpair/errors.hpp"
#include "radpair/parallel.hpp"

namespace radpair {

void validate(const ModelConfig& m) {
  validate(m.system);
  validate(m.kinetics);
  validate(m.photocycle);
  validate(m.fields);
  if (m.numerics.orientation_grid != 0 && m.numerics.orientation_grid < 50) {
    throw InvalidArgument("orientation_grid must be 0 (off) or >= 50");
  }
  if (!(m.numerics.eps_trunc > 0.0 && m.numerics.eps_trunc <= 1e-3)) {
    throw InvalidArgument("eps_trunc must lie in (0, 1e-3]");
  }
  if (m.numerics.dt < 0.0) throw InvalidArgument("dt must be >= 0");
  if (m.marker) {
    const auto& mk = *m.marker;
    if (!(mk.g > 0.0) || !(mk.t1 > 0.0) || !(mk.t2 > 0.0)) {
      throw InvalidArgument("marker g, t1, t2 must be positive");
    }
  }
}

Spectrum SweepResult::spectrum() const {
  Spectrum s;
  s.frequency = axis_values;
  s.contrast = contrast;
  return s;
}

std::vector<Eigen::Vector3d> fibonacci_sphere(std::size_t n) {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    pts.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return pts;
}

namespace {

// Field-independent pieces for one molecular orientation.
struct OrientationContext {
  SpinSystem system;
  SpinBasis basis;
  Operator couplings;     // hyperfine + dipolar + exchange
  Operator zeeman_unit;   // zeeman at 1 mT
  Operator singlet;
  Operator triplet;
  DensityMatrix rho0;

  OrientationContext(SpinSystem sys, InitialStateKind kind)
      : system(std::move(sys)), basis(system) {
    couplings = hyperfine(basis, system) + dipolar(basis, system) + exchange(basis, system);
    zeeman_unit = zeeman(basis, system, 1.0);
    singlet = singlet_projector(basis);
    triplet = triplet_projectors(basis).total;
    rho0 = initial_state(basis, kind);
  }

  Operator static_h(double b0) const { return couplings + b0 * zeeman_unit; }
};

std::vector<OrientationContext> prepare(const ModelConfig& model) {
  std::vector<OrientationContext> out;
  if (model.numerics.orientation_grid == 0) {
    out.emplace_back(model.system, model.initial_state);
    return out;
  }
  for (const Eigen::Vector3d& dir : fibonacci_sphere(model.numerics.orientation_grid)) {
    // Rotate the molecule so the sampled direction ends up along the field.
    const Eigen::Matrix3d r =
        Eigen::Quaterniond::FromTwoVectors(dir, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    out.emplace_back(rotated(model.system, r), model.initial_state);
  }
  return out;
}

double lab_dt(const ModelConfig& model, const FieldProtocol& p) {
  if (model.numerics.dt > 0.0) return model.numerics.dt;
  return 1.0 / (32.0 * p.rf_frequency);
}

YieldResult yield_one(const ModelConfig& model, const OrientationContext& ctx,
                      const FieldProtocol& p, std::size_t* rwa_invalid) {
  const Operator h0 = ctx.static_h(p.b0);
  const bool driven = p.rf_enabled && p.rf_b1 > 0.0;
  if (driven && !model.numerics.rwa_enabled) {
    return driven_singlet_yield(ctx.rho0, ctx.system, p, model.kinetics, lab_dt(model, p));
  }
  if (!driven) {
    const Liouvillian gen(h0, ctx.singlet, ctx.triplet, model.kinetics);
    return singlet_yield(ctx.rho0, gen, model.numerics.eps_trunc);
  }
  RotatingFrameResult rot = rotating_frame(ctx.basis, ctx.system, h0, p);
  if (!rot.secular_valid && rwa_invalid) ++*rwa_invalid;
  const Liouvillian gen(std::move(rot.hamiltonian), rot.secular(ctx.singlet),
                        rot.secular(ctx.triplet), model.kinetics);
  return singlet_yield(DensityMatrix{rot.to_frame(ctx.rho0.matrix), 0.0}, gen,
                       model.numerics.eps_trunc);
}

YieldResult yield_averaged(const ModelConfig& model, const std::vector<OrientationContext>& ctxs,
                           const FieldProtocol& p, std::size_t* rwa_invalid = nullptr) {
  YieldResult acc;
  for (const auto& ctx : ctxs) {
    const YieldResult y = yield_one(model, ctx, p, rwa_invalid);
    acc.phi_singlet += y.phi_singlet;
    acc.phi_triplet += y.phi_triplet;
    acc.truncation_residual += y.truncation_residual;
    acc.wall_time += y.wall_time;
  }
  const double n = static_cast<double>(ctxs.size());
  acc.phi_singlet /= n;
  acc.phi_triplet /= n;
  acc.truncation_residual /= n;
  return acc;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void require_ascending(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw InvalidArgument(std::string(what) + " is empty");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) throw InvalidArgument(std::string(what) + " must be strictly ascending");
  }
}

// Bloch steady-state saturation of a g-marker line.
double marker_contrast(const MarkerLine& mk, double b0, double b1, double nu) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double rabi = 0.5 * mk.g * PhysicalConstants::bohr_magneton_over_h * b1;
  const double detuning = nu - electron_larmor(mk.g, b0);
  const double s = std::pow(two_pi * rabi, 2) * mk.t1 * mk.t2;
  const double d = std::pow(two_pi * detuning * mk.t2, 2);
  return mk.max_contrast * s / (1.0 + s + d);
}

}  // namespace

YieldResult evaluate_yield(const ModelConfig& model, const FieldProtocol& protocol) {
  validate(model);
  validate(protocol);
  return yield_averaged(model, prepare(model), protocol);
}

SweepResult mfe_sweep(const ModelConfig& model, const std::vector<double>& b_values) {
  validate(model);
  require_ascending(b_values, "field list");
  const double lo = model.numerics.allow_negative_fields ? -100.0 : 0.0;
  for (double b : b_values) {
    if (b < lo || b > 100.0) {
      throw InvalidArgument("MFE field " + fmt(b) + " mT outside [" + fmt(lo) + ", 100]");
    }
  }
  const auto ctxs = prepare(model);
  const double tau = model.kinetics.rp_lifetime_proxy();
  SweepResult out;
  out.axis_name = "b0_mT";
  out.axis_values = b_values;
  out.phi_singlet.resize(b_values.size());
  out.fluorescence.resize(b_values.size());
  parallel_for(b_values.size(), model.threads, [&](std::size_t i) {
    FieldProtocol p = model.fields;
    p.rf_enabled = false;
    p.b0 = b_values[i];
    // Zeeman is linear in b0, so negative fields simply flip its sign.
    const YieldResult y = yield_averaged(model, ctxs, p);
    out.phi_singlet[i] = y.phi_singlet;
    out.fluorescence[i] = steady_state_fluorescence(model.photocycle, y.phi_singlet, tau);
  });
  out.metadata["experiment"] = "mfe";
  out.metadata["initial_state"] = to_string(model.initial_state);
  out.metadata["orientations"] = std::to_string(ctxs.size());
  return out;
}

std::vector<double> frequency_grid(double f_min, double f_max, double step) {
  if (!(step > 0.0) || !(f_max >= f_min) || !(f_min > 0.0)) {
    throw InvalidArgument("frequency grid needs 0 < min <= max and step > 0");
  }
  const auto n = static_cast<std::size_t>(std::floor((f_max - f_min) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f_min + static_cast<double>(i) * step;
  return out;
}

SweepResult odmr_sweep(const ModelConfig& model, double b0, double b1,
                       const std::vector<double>& freq_values) {
  validate(model);
  require_ascending(freq_values, "frequency list");
  if (!(freq_values.front() > 0.0)) throw InvalidArgument("frequencies must be positive");
  if (!(b1 >= 0.0)) throw InvalidArgument("b1 must be >= 0");
  if (!(b0 >= 0.0)) throw InvalidArgument("b0 must be >= 0");

  SweepResult out;
  out.axis_name = "freq_MHz";
  out.axis_values = freq_values;
  const std::size_t n = freq_values.size();
  out.phi_singlet.resize(n);
  out.fluorescence.resize(n);
  out.contrast.resize(n);
  out.metadata["experiment"] = "odmr";
  out.metadata["b0_mT"] = fmt(b0);
  out.metadata["b1_mT"] = fmt(b1);

  if (model.marker) {
    const double f_off = model.photocycle.fluorescence_per_ground_excitation;
    for (std::size_t i = 0; i < n; ++i) {
      out.contrast[i] = marker_contrast(*model.marker, b0, b1, freq_values[i]);
      out.phi_singlet[i] = std::numeric_limits<double>::quiet_NaN();
      out.fluorescence[i] = f_off * (1.0 + out.contrast[i]);
    }
    out.metadata["path"] = "marker";
    return out;
  }

  const auto ctxs = prepare(model);
  const double tau = model.kinetics.rp_lifetime_proxy();
  FieldProtocol off = model.fields;
  off.b0 = b0;
  off.rf_enabled = false;
  const double phi_off = yield_averaged(model, ctxs, off).phi_singlet;
  std::vector<std::size_t> invalid(n, 0);
  parallel_for(n, model.threads, [&](std::size_t i) {
    FieldProtocol p = model.fields;
    p.b0 = b0;
    p.rf_b1 = b1;
    p.rf_frequency = freq_values[i];
    p.rf_enabled = true;
    const YieldResult y = yield_averaged(model, ctxs, p, &invalid[i]);
    out.phi_singlet[i] = y.phi_singlet;
    out.fluorescence[i] = steady_state_fluorescence(model.photocycle, y.phi_singlet, tau);
    out.contrast[i] = odmr_contrast(model.photocycle, y.phi_singlet, phi_off, tau);
  });
  std::size_t total_invalid = 0;
  for (auto v : invalid) total_invalid += v;
  out.metadata["path"] = model.numerics.rwa_enabled ? "rotating_frame" : "lab_frame";
  out.metadata["phi_singlet_off"] = fmt(phi_off);
  out.metadata["rwa_invalid_points"] = std::to_string(total_invalid);
  out.metadata["initial_state"] = to_string(model.initial_state);
  out.metadata["orientations"] = std::to_string(ctxs.size());
  return out;
}

std::vector<SweepResult> field_frequency_map(const ModelConfig& model,
                                             const std::vector<double>& b0_values,
                                             double freq_span, double freq_step) {
  require_ascending(b0_values, "field list");
  if (b0_values.front() < 40.0 || b0_values.back() > 80.0) {
    throw InvalidArgument("map fields must lie within [40, 80] mT");
  }
  if (!(freq_span > 0.0) || !(freq_step > 0.0)) {
    throw InvalidArgument("freq_span and freq_step must be positive");
  }
  const double g = model.marker ? model.marker->g : model.system.electron_a.g_factor;
  std::vector<SweepResult> rows;
  rows.reserve(b0_values.size());
  for (double b0 : b0_values) {
    const double centre = electron_larmor(g, b0);
    const double lo = centre - 0.5 * freq_span;
    const auto steps = static_cast<std::size_t>(std::floor(freq_span / freq_step + 1e-9));
    std::vector<double> freqs(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) freqs[i] = lo + static_cast<double>(i) * freq_step;
    rows.push_back(odmr_sweep(model, b0, model.fields.rf_b1, freqs));
    rows.back().metadata["experiment"] = "map";
  }
  return rows;
}

double mfe_amplitude(const SweepResult& mfe) {
  if (mfe.fluorescence.empty()) throw EmptyResult("empty MFE curve");
  const double ref = mfe.fluorescence.front();
  if (ref == 0.0) throw DivisionDomain("reference fluorescence is zero");
  double amp = 0.0;
  for (double f : mfe.fluorescence) amp = std::max(amp, std::abs(f / ref - 1.0));
  return amp;
}

double peak_contrast(const SweepResult& odmr) {
  if (odmr.contrast.empty()) throw EmptyResult("empty ODMR spectrum");
  double amp = 0.0;
  for (double c : odmr.contrast) amp = std::max(amp, std::abs(c));
  return amp;
}

MutantComparison mutant_comparison(const ModelConfig& wild_type, const ModelConfig& mutant,
                                   const std::vector<double>& b_values,
                                   const std::vector<double>& freq_values) {
  if (wild_type.fields.b0 != mutant.fields.b0) {
    throw InvalidArgument("wild type and mutant must share b0");
  }
  auto arm = [&](const ModelConfig& m) {
    MutantArm a;
    a.mfe = mfe_sweep(m, b_values);
    a.odmr = odmr_sweep(m, m.fields.b0, m.fields.rf_b1, freq_values);
    a.mfe_amplitude = mfe_amplitude(a.mfe);
    a.peak_contrast = peak_contrast(a.odmr);
    return a;
  };
  MutantComparison out;
  out.wild_type = arm(wild_type);
  out.mutant = arm(mutant);
  out.ordering_holds = out.wild_type.mfe_amplitude > out.mutant.mfe_amplitude &&
                       out.wild_type.peak_contrast > out.mutant.peak_contrast;
  return out;
}

ProtocolTrace protocol_emulator(const EmulatorConfig& c) {
  if (c.n_cycles < 1) throw InvalidArgument("n_cycles must be >= 1");
  if (!(c.baseline >= 0.0)) throw InvalidArgument("baseline must be non-negative");
  const auto& tm = c.timing;
  if (!(tm.rf_window_s > 0.0) || !(tm.exposure_s > 0.0) || !(tm.recovery_s >= 0.0) ||
      !(tm.mfe_frame_s > 0.0)) {
    throw InvalidArgument("emulator timing must be positive");
  }
  if (c.noise.model == NoiseModel::Shot && !(c.noise.scale > 0.0)) {
    throw InvalidArgument("shot-noise scale must be positive");
  }
  if (c.noise.model == NoiseModel::Gaussian && !(c.noise.sigma >= 0.0)) {
    throw InvalidArgument("gaussian sigma must be non-negative");
  }

  ProtocolTrace tr;
  tr.bleach_slope_true = c.bleach_slope;
  tr.noise_seed = c.seed;
  for (std::size_t k = 0; k < c.n_cycles; ++k) {
    const double kd = static_cast<double>(k);
    if (c.mode == EmulatorMode::Odmr) {
      const double period = tm.rf_window_s + tm.recovery_s + tm.exposure_s + tm.recovery_s;
      const double t0 = kd * period;
      tr.frame_times.push_back(t0 + 0.5 * tm.rf_window_s);
      tr.frame_times.push_back(t0 + tm.rf_window_s + tm.recovery_s + 0.5 * tm.exposure_s);
    } else {
      const double t0 = 2.0 * kd * tm.mfe_frame_s;
      tr.frame_times.push_back(t0 + 0.5 * tm.mfe_frame_s);
      tr.frame_times.push_back(t0 + 1.5 * tm.mfe_frame_s);
    }
    tr.rf_on_mask.push_back(true);
    tr.rf_on_mask.push_back(false);
  }

  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  tr.intensities.reserve(tr.frame_times.size());
  for (std::size_t i = 0; i < tr.frame_times.size(); ++i) {
    const double t = tr.frame_times[i];
    const double on = tr.rf_on_mask[i] ? 1.0 : 0.0;
    const double mean = c.baseline * (1.0 + c.true_contrast * on) + c.bleach_slope * t;
    if (mean < 0.0) {
      throw InvalidArgument("bleach drives the intensity negative at t = " + fmt(t) + " s");
    }
    double v = mean;
    switch (c.noise.model) {
      case NoiseModel::None: break;
      case NoiseModel::Shot: {
        std::poisson_distribution<long long> counts(mean * c.noise.scale);
        v = static_cast<double>(counts(rng)) / c.noise.scale;
        break;
      }
      case NoiseModel::Gaussian: v = std::max(0.0, mean + c.noise.sigma * gauss(rng)); break;
    }
    tr.intensities.push_back(v);
  }
  return tr;
}

}  // namespace radpair
