#include "radpair/photocycle.hpp"

#include <algorithm>
#include <cmath>

#include "radpair/errors.hpp"

namespace radpair {

void validate(const PhotocycleModel& m) {
  if (!(m.excitation_rate >= 0.0) || !(m.rp_formation_yield >= 0.0) ||
      !(m.rp_formation_yield <= 1.0) || !(m.triplet_product_lifetime >= 0.0) ||
      !(m.fluorescence_per_ground_excitation >= 0.0) || !std::isfinite(m.excitation_rate) ||
      !std::isfinite(m.triplet_product_lifetime)) {
    throw InvalidModel("photocycle rates must be finite and non-negative, yield in [0, 1]");
  }
}

PoolPopulations steady_state_pools(const PhotocycleModel& m, double phi_singlet,
                                   double rp_lifetime) {
  validate(m);
  // round-off from the yield solvers may overshoot the bounds slightly
  if (!(phi_singlet >= -1e-9 && phi_singlet <= 1.0 + 1e-9)) {
    throw InvalidArgument("phi_singlet must lie in [0, 1]");
  }
  phi_singlet = std::clamp(phi_singlet, 0.0, 1.0);
  if (!(rp_lifetime >= 0.0) || !std::isfinite(rp_lifetime)) {
    throw InvalidModel("radical-pair lifetime must be finite and non-negative");
  }
  const double r = m.excitation_rate * m.rp_formation_yield;
  const double rp_weight = r * rp_lifetime;
  const double p_weight = (1.0 - phi_singlet) * r * m.triplet_product_lifetime;
  const double norm = 1.0 + rp_weight + p_weight;
  PoolPopulations p;
  p.ground = 1.0 / norm;
  p.radical_pair = rp_weight / norm;
  p.product = p_weight / norm;
  return p;
}

double steady_state_fluorescence(const PhotocycleModel& m, double phi_singlet,
                                 double rp_lifetime) {
  validate(m);
  if (m.excitation_rate == 0.0 && m.fluorescence_per_ground_excitation == 0.0) {
    throw InvalidModel("degenerate photocycle: all rates zero");
  }
  return m.fluorescence_per_ground_excitation *
         steady_state_pools(m, phi_singlet, rp_lifetime).ground;
}

double odmr_contrast(const PhotocycleModel& m, double phi_on, double phi_off,
                     double rp_lifetime) {
  const double f_off = steady_state_fluorescence(m, phi_off, rp_lifetime);
  if (f_off == 0.0) throw DivisionDomain("fluorescence with RF off is zero");
  const double f_on = steady_state_fluorescence(m, phi_on, rp_lifetime);
  return f_on / f_off - 1.0;
}

}  // namespace radpair
