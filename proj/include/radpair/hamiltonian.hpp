#pragma once

#include <vector>

#include "radpair/spin_core.hpp"

namespace radpair {

// All Hamiltonians are returned in MHz (ordinary frequency). Fields are in mT,
// times in microseconds.
struct PhysicalConstants {
  static constexpr double bohr_magneton_over_h = 13.9962449;  // MHz/mT
  static constexpr double free_electron_g = kFreeElectronG;
  static constexpr double proton_gyromagnetic = 0.0425775;  // MHz/mT
};

// Electron Larmor frequency g * muB/h * B in MHz.
double electron_larmor(double g, double b0_mt);

struct FieldProtocol {
  double b0 = 0.0;            // mT, static field along z
  double rf_frequency = 0.0;  // MHz
  double rf_b1 = 0.0;         // mT, linear drive along x
  double rf_phase = 0.0;      // rad
  bool rf_enabled = false;
  // Per-electron scaling of B1 (both 1 for a homogeneous strip-line field).
  double b1_scale_a = 1.0;
  double b1_scale_b = 1.0;
};

void validate(const FieldProtocol& protocol);

Operator zeeman(const SpinBasis& basis, const SpinSystem& system, double b0);
Operator zeeman(const SpinSystem& system, double b0);

// Sum over nuclei of S_e . A . I; throws InvalidTensor for asymmetric A.
Operator hyperfine(const SpinBasis& basis, const SpinSystem& system);
Operator hyperfine(const SpinSystem& system);

// d (3 (S_a.n)(S_b.n) - S_a.S_b) for the unit inter-electron axis n.
Operator dipolar(const SpinBasis& basis, const SpinSystem& system);
Operator dipolar(const SpinSystem& system);

// J (2 S_a.S_b + 1/2): singlet at -J, triplet at +J, so J > 0 puts the
// singlet below the triplet with gap 2J.
Operator exchange(const SpinBasis& basis, const SpinSystem& system);
Operator exchange(const SpinSystem& system);

// Electron-electron coupling of two point dipoles r nm apart, in MHz
// (52.04 / r^3 for free-electron g factors).
double point_dipole_coupling(double r_nm, double g_a = kFreeElectronG,
                             double g_b = kFreeElectronG);

// Lab-frame RF term at time t (us); zero when RF is disabled.
Operator rf_drive(const SpinBasis& basis, const SpinSystem& system,
                  const FieldProtocol& protocol, double t);
Operator rf_drive(const SpinSystem& system, const FieldProtocol& protocol, double t);

// Time-independent part: zeeman + hyperfine + dipolar + exchange.
Operator static_hamiltonian(const SpinBasis& basis, const SpinSystem& system, double b0);
Operator static_hamiltonian(const SpinSystem& system, double b0);

Operator total_hamiltonian(const SpinBasis& basis, const SpinSystem& system,
                           const FieldProtocol& protocol, double t);
Operator total_hamiltonian(const SpinSystem& system, const FieldProtocol& protocol,
                           double t);

struct RotatingFrameResult {
  Operator hamiltonian;  // MHz, time independent, expressed in the frame basis
  // Columns are the static eigenvectors; identity when RF is off.
  Operator basis_change;
  // Rounded electron S_z of each frame basis state; empty when RF is off.
  std::vector<int> labels;
  // Ratio of the largest drive amplitude to the carrier frequency; the
  // rotating-wave treatment is flagged invalid above 0.05 or when an
  // eigenstate carries no well-defined electron S_z.
  double drive_to_carrier = 0.0;
  bool secular_valid = true;

  Operator to_frame(const Operator& op) const;
  // to_frame followed by removal of elements between different labels.
  Operator secular(const Operator& op) const;
};

// Moves to the eigenbasis of the static Hamiltonian and to the frame rotating
// at the RF carrier, each eigenstate turning with its electron S_z label. The
// static part stays exact. Only drive components connecting labels one apart
// survive, at half amplitude; operators passed through secular() lose their
// parts that oscillate at multiples of the carrier.
RotatingFrameResult rotating_frame(const SpinBasis& basis, const SpinSystem& system,
                                   const Operator& h_static, const FieldProtocol& protocol);
RotatingFrameResult rotating_frame(const SpinSystem& system, const Operator& h_static,
                                   const FieldProtocol& protocol);

}  // namespace radpair
