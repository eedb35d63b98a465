#pragma once

#include <vector>

#include "radpair/dynamics.hpp"

// Independent verification path for the dynamics module: classical RK4 on the
// master equation written in commutator/anticommutator form, with a
// step-halving (Richardson) error estimate. Linked by the test suites only.
namespace radpair::oracle {

inline constexpr std::size_t kMaxOracleDim = 32;

struct Trajectory {
  std::vector<DensityMatrix> states;
  // max ||rho_dt - rho_{dt/2}||_inf * 16/15 over the sampled states.
  double richardson_error = 0.0;
};

// Integrates from rho0.time to rho0.time + t_end with step dt (and dt/2 for
// the error estimate); samples every `output_every` steps of the coarse run.
// Throws OracleScopeError for dim > 32.
Trajectory reference_oracle(const DensityMatrix& rho0, const SpinSystem& system,
                            const FieldProtocol& protocol, const KineticModel& kinetics,
                            double dt, double t_end, std::size_t output_every = 1);

// kS int_0^t_end tr(P_S rho) by composite Simpson on the RK4 grid
// (number of steps forced even).
double reference_singlet_yield(const DensityMatrix& rho0, const SpinSystem& system,
                               const FieldProtocol& protocol, const KineticModel& kinetics,
                               double dt, double t_end);

}  // namespace radpair::oracle
