#pragma once

namespace radpair {

// Three-pool cycle under continuous illumination: ground G, radical pair RP
// and a slowly returning triplet-channel product P. The excited singlet is
// eliminated adiabatically.
//
//   G  --excitation_rate * rp_formation_yield-->  RP
//   RP --phi_S / tau_RP-->  G
//   RP --(1 - phi_S) / tau_RP-->  P
//   P  --1 / triplet_product_lifetime-->  G
//
// Fluorescence is proportional to the steady-state ground population.
struct PhotocycleModel {
  double excitation_rate = 0.01;             // 1/us
  double rp_formation_yield = 0.5;
  double triplet_product_lifetime = 1000.0;  // us
  double fluorescence_per_ground_excitation = 1.0;
};

void validate(const PhotocycleModel& model);

struct PoolPopulations {
  double ground = 0.0;
  double radical_pair = 0.0;
  double product = 0.0;
};

PoolPopulations steady_state_pools(const PhotocycleModel& model, double phi_singlet,
                                   double rp_lifetime);

// F = fluorescence_per_ground_excitation * G_ss. Throws InvalidModel for a
// degenerate model.
double steady_state_fluorescence(const PhotocycleModel& model, double phi_singlet,
                                 double rp_lifetime);

// F(phi_on) / F(phi_off) - 1. Throws DivisionDomain if F(phi_off) = 0.
double odmr_contrast(const PhotocycleModel& model, double phi_on, double phi_off,
                     double rp_lifetime);

}  // namespace radpair
